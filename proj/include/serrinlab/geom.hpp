#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "serrinlab/error.hpp"

namespace serrinlab {

using Vec = Eigen::VectorXd;

// Lens domain Omega = B_r(z) intersected with the open upper unit half ball,
// together with the constants of its mixed boundary value problem:
// Laplacian f = 1 in Omega, f = 0 on Sigma, f_nu - f = c on T,
// with the overdetermined Neumann value c0 on Sigma and r = d*c0.
struct CapSpec {
    int d = 2;        // ambient dimension
    Vec z;            // cap center
    double r = 0.0;   // cap radius, r = d*c0
    double c0 = 0.0;  // Neumann constant on Sigma
    double c = 0.0;   // Robin constant on T
    double tilt = 0.0;

    double z_norm() const { return z.norm(); }
};

inline Vec axis_point(int d, double norm, double tilt) {
    Vec z = Vec::Zero(d);
    z[0] = norm * std::sin(tilt);
    z[d - 1] = norm * std::cos(tilt);
    return z;
}

// Invariant diagnostics; empty means valid.
inline std::vector<std::string> validate(const CapSpec& spec) {
    std::vector<std::string> issues;
    if (spec.d < 2) issues.push_back("d < 2");
    if (!(spec.c0 > 0.0)) issues.push_back("c0 <= 0: Neumann constant must be positive");
    if (!(spec.r > 0.0)) issues.push_back("r <= 0");
    if (std::abs(spec.r - spec.d * spec.c0) > 1e-12 * (1.0 + spec.r))
        issues.push_back("r != d*c0");
    if (!(std::abs(spec.c) < spec.c0)) issues.push_back("|c| >= c0: contact angle degenerate");
    const double zn = spec.z_norm();
    const double zz_expected = 1.0 + spec.d * spec.d * spec.c0 * spec.c0 - 2.0 * spec.d * spec.c;
    if (std::abs(zn * zn - zz_expected) > 1e-10 * (1.0 + zz_expected))
        issues.push_back("|z|^2 != 1 + d^2*c0^2 - 2*d*c");
    if (!(std::abs(spec.r - 1.0) < zn))
        issues.push_back("|z| <= |r - 1|: one sphere contains the other, Gamma empty");
    if (!(zn < spec.r + 1.0))
        issues.push_back("|z| >= r + 1: Gamma empty");
    if (spec.d >= 1 && spec.z.size() == spec.d && !(spec.z[spec.d - 1] > spec.r))
        issues.push_back("z_d <= r: domain closure touches the plane {x_d = 0}");
    return issues;
}

// Constants -> cap of Theorem form: r = d*c0, |z| = sqrt(1 + d^2 c0^2 - 2 d c),
// z placed on the +e_d axis (optionally tilted in the (e_1, e_d) plane).
inline CapSpec cap_from_constants(int d, double c0, double c, double tilt = 0.0) {
    if (d < 2) throw Error("BadDimension", "need d >= 2");
    if (!(c0 > 0.0)) throw Error("NonPositiveC0", "c0 must be positive, got " + std::to_string(c0));
    if (!(std::abs(c) < c0))
        throw Error("InvalidAngle", "|c| >= c0: cos(theta) = -c/c0 leaves (-1,1)");
    CapSpec spec;
    spec.d = d;
    spec.c0 = c0;
    spec.c = c;
    spec.r = d * c0;
    spec.tilt = tilt;
    const double zz = 1.0 + double(d) * d * c0 * c0 - 2.0 * d * c;
    spec.z = axis_point(d, std::sqrt(zz), tilt);
    auto issues = validate(spec);
    if (!issues.empty()) {
        std::string msg;
        for (const auto& s : issues) msg += (msg.empty() ? "" : "; ") + s;
        throw Error("DegenerateDomain", msg);
    }
    return spec;
}

inline std::pair<double, double> constants_from_cap(const CapSpec& spec) {
    const double c0 = spec.r / spec.d;
    const double zn = spec.z_norm();
    const double c = (1.0 + spec.r * spec.r - zn * zn) / (2.0 * spec.d);
    return {c0, c};
}

// theta = arccos(-c/c0), cross-checked against the cosine-theorem form
// that only sees |z| and r.
inline double contact_angle(const CapSpec& spec) {
    const double cosine = -spec.c / spec.c0;
    const double zn = spec.z_norm();
    const double cosine_geom = -(1.0 + spec.r * spec.r - zn * zn) / (2.0 * spec.r);
    if (std::abs(cosine - cosine_geom) > 1e-12)
        throw Error("InconsistentSpec", "the two cos(theta) routes disagree");
    return std::acos(cosine);
}

inline nlohmann::json to_json(const CapSpec& spec) {
    nlohmann::json j;
    j["d"] = spec.d;
    j["c0"] = spec.c0;
    j["c"] = spec.c;
    j["tilt"] = spec.tilt;
    j["r"] = spec.r;
    j["z_norm"] = spec.z_norm();
    j["theta_deg"] = contact_angle(spec) * 180.0 / M_PI;
    return j;
}

inline CapSpec capspec_from_json(const nlohmann::json& j) {
    return cap_from_constants(j.at("d").get<int>(), j.at("c0").get<double>(),
                              j.at("c").get<double>(), j.value("tilt", 0.0));
}

}  // namespace serrinlab
