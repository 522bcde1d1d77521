#include <doctest.h>

#include "serrinlab/geom.hpp"

using namespace serrinlab;

TEST_CASE("cap_from_constants reproduces the theorem constants") {
    const CapSpec spec = cap_from_constants(2, 0.3, -0.15);
    CHECK(spec.r == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(spec.z_norm() == doctest::Approx(1.4).epsilon(1e-15));
    CHECK(spec.z[0] == doctest::Approx(0.0));
    CHECK(spec.z[1] == doctest::Approx(1.4).epsilon(1e-15));

    const CapSpec spec2 = cap_from_constants(2, 0.3, 0.0);
    CHECK(spec2.z_norm() == doctest::Approx(std::sqrt(1.36)).epsilon(1e-14));
}

TEST_CASE("cap_from_constants rejects bad constants") {
    CHECK_THROWS_WITH_AS(cap_from_constants(2, -0.1, 0.0), doctest::Contains("NonPositiveC0"),
                         Error);
    CHECK_THROWS_WITH_AS(cap_from_constants(2, 0.3, 0.4), doctest::Contains("InvalidAngle"),
                         Error);
    CHECK_THROWS_WITH_AS(cap_from_constants(2, 0.3, 0.3), doctest::Contains("InvalidAngle"),
                         Error);
    // 2dc >= 1 pulls the center below the radius
    CHECK_THROWS_WITH_AS(cap_from_constants(2, 0.3, 0.29), doctest::Contains("DegenerateDomain"),
                         Error);
}

TEST_CASE("contact_angle and its geometric cross-check") {
    CHECK(contact_angle(cap_from_constants(2, 0.3, 0.0)) == doctest::Approx(M_PI / 2).epsilon(1e-14));
    CHECK(contact_angle(cap_from_constants(2, 0.3, -0.15)) ==
          doctest::Approx(M_PI / 3).epsilon(1e-14));
    CHECK(contact_angle(cap_from_constants(2, 0.3, 0.15)) ==
          doctest::Approx(2.0 * M_PI / 3).epsilon(1e-14));
}

TEST_CASE("contact angle is monotone in c and tilt-invariant") {
    double prev = 0.0;
    for (double c : {-0.25, -0.1, 0.0, 0.1, 0.2}) {
        const double theta = contact_angle(cap_from_constants(2, 0.3, c));
        CHECK(theta > prev);
        prev = theta;
    }
    const double base = contact_angle(cap_from_constants(3, 0.2, -0.1));
    const double tilted = contact_angle(cap_from_constants(3, 0.2, -0.1, 0.2));
    CHECK(base == doctest::Approx(tilted).epsilon(1e-14));
}

TEST_CASE("round-trip constants_from_cap") {
    for (int d : {2, 3, 4}) {
        for (double c : {-0.2, 0.0, 0.1}) {
            const CapSpec spec = cap_from_constants(d, 0.25, c * 0.25 / 0.3);
            const auto [c0, cc] = constants_from_cap(spec);
            CHECK(c0 == doctest::Approx(0.25).epsilon(1e-14));
            CHECK(cc == doctest::Approx(c * 0.25 / 0.3).epsilon(1e-13));
        }
    }
}

TEST_CASE("validate flags constructed violations") {
    CHECK(validate(cap_from_constants(2, 0.3, -0.15)).empty());

    CapSpec bad = cap_from_constants(2, 0.3, -0.15);
    bad.z = Vec::Zero(2);
    bad.z[1] = 0.5;
    auto issues = validate(bad);
    bool found = false;
    for (const auto& s : issues) found |= s.find("z_d <= r") != std::string::npos;
    CHECK(found);

    bad.z[1] = 3.0;
    issues = validate(bad);
    found = false;
    for (const auto& s : issues) found |= s.find("Gamma empty") != std::string::npos;
    CHECK(found);
}

TEST_CASE("JSON serialization round-trips") {
    const CapSpec spec = cap_from_constants(3, 0.22, -0.09, 0.05);
    const auto j = to_json(spec);
    CHECK(j.at("r").get<double>() == doctest::Approx(0.66));
    const CapSpec back = capspec_from_json(j);
    CHECK(back.d == spec.d);
    CHECK(back.c0 == doctest::Approx(spec.c0).epsilon(1e-15));
    CHECK(back.c == doctest::Approx(spec.c).epsilon(1e-15));
    CHECK((back.z - spec.z).norm() < 1e-14);
}
