#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include <json.hpp>

#include "serrinlab/error.hpp"
#include "serrinlab/geom.hpp"

namespace serrinlab {

using Vec2 = Eigen::Vector2d;

inline Vec2 rot90(const Vec2& v) { return Vec2(-v[1], v[0]); }   // +90 degrees
inline Vec2 rotm90(const Vec2& v) { return Vec2(v[1], -v[0]); }  // -90 degrees
inline Vec2 dir_of(double a) { return Vec2(std::cos(a), std::sin(a)); }

struct PerturbationMode {
    int k;
    double phase;
};

// Boundary of a 2-D lens domain Omega in the upper unit half disk.
//
// sigma(s), s in [0,1], is a polar graph around the cap center z:
//   sigma(s) = z + rho(phi(s)) * dir(phi(s)),  phi(s) = phi1 + s*dphi,
//   rho(phi) = r * (1 + eps * W(u)),  u = (phi - phi1)/dphi,
// where W is a bump that vanishes to second order at the corners and is
// normalized so sup|W| = 1.  t_arc(s) is the unit-circle arc from p1 to p2.
//
// Orientation: s runs counterclockwise around Omega on Sigma and clockwise
// on T, so the outward normal sits on the right of the tangent everywhere.
class DomainBoundary {
public:
    enum class Kind { Cap, Perturbed };

    static DomainBoundary cap(const CapSpec& spec) { return DomainBoundary(spec, 0.0, {}); }

    static DomainBoundary perturbed(const CapSpec& spec, double eps,
                                    std::vector<PerturbationMode> modes) {
        return DomainBoundary(spec, eps, std::move(modes));
    }

    Vec2 sigma(double s) const {
        const double phi = phi1_ + s * dphi_;
        return z_ + rho(s) * dir_of(phi);
    }

    Vec2 sigma_deriv(double s) const {
        const double phi = phi1_ + s * dphi_;
        const Vec2 d = dir_of(phi);
        return rho_ds(s) * d + rho(s) * dphi_ * rot90(d);
    }

    // Outward unit normal to Sigma with respect to Omega (points away from z).
    Vec2 sigma_normal(double s) const {
        const double phi = phi1_ + s * dphi_;
        const Vec2 d = dir_of(phi);
        // tangent ~ rho' * d + rho*dphi * rot90(d); outward normal = rot(-90) tangent
        Vec2 n = rho(s) * dphi_ * d - rho_ds(s) * rot90(d);
        return n / n.norm();
    }

    Vec2 t_arc(double s) const { return dir_of(psi1_ + s * dpsi_); }
    Vec2 t_arc_deriv(double s) const { return dpsi_ * rot90(dir_of(psi1_ + s * dpsi_)); }

    const Vec2& corner(int i) const { return i == 0 ? p1_ : p2_; }

    Kind kind() const { return kind_; }
    double eps() const { return eps_; }
    const std::vector<PerturbationMode>& modes() const { return modes_; }
    const CapSpec& spec() const { return spec_; }
    const Vec2& center() const { return z_; }
    double radius() const { return r_; }

    double sigma_arclength() const { return curve_length([this](double s) { return sigma_deriv(s); }); }
    double t_arclength() const { return std::abs(dpsi_); }

private:
    DomainBoundary(const CapSpec& spec, double eps, std::vector<PerturbationMode> modes)
        : spec_(spec), eps_(eps), modes_(std::move(modes)) {
        if (spec.d != 2) throw Error("BadDimension", "lens boundaries are d = 2 only");
        auto issues = validate(spec);
        if (!issues.empty()) throw Error("DegenerateDomain", issues.front());
        kind_ = (eps_ != 0.0 && !modes_.empty()) ? Kind::Perturbed : Kind::Cap;
        z_ = Vec2(spec.z[0], spec.z[1]);
        r_ = spec.r;

        // Circle-circle intersection |x| = 1, |x - z| = r.
        const double zn = z_.norm();
        const Vec2 e = z_ / zn;
        const Vec2 eperp = rot90(e);
        const double a = (1.0 + zn * zn - r_ * r_) / (2.0 * zn);
        const double b2 = 1.0 - a * a;
        if (b2 <= 0.0) throw Error("DegenerateDomain", "circles do not intersect transversally");
        const double b = std::sqrt(b2);
        p1_ = a * e + b * eperp;
        p2_ = a * e - b * eperp;

        // Sigma angles around z: the in-disk arc runs counterclockwise from p1.
        phi1_ = std::atan2(p1_[1] - z_[1], p1_[0] - z_[0]);
        double phi2 = std::atan2(p2_[1] - z_[1], p2_[0] - z_[0]);
        dphi_ = std::fmod(phi2 - phi1_ + 4.0 * M_PI, 2.0 * M_PI);
        if ((z_ + r_ * dir_of(phi1_ + 0.5 * dphi_)).norm() >= 1.0)
            throw Error("DegenerateDomain", "Sigma arc midpoint left the unit disk");

        // T angles around the origin: clockwise from p1 (decreasing angle).
        psi1_ = std::atan2(p1_[1], p1_[0]);
        double psi2 = std::atan2(p2_[1], p2_[0]);
        dpsi_ = -std::fmod(psi1_ - psi2 + 4.0 * M_PI, 2.0 * M_PI);
        if ((dir_of(psi1_ + 0.5 * dpsi_) - z_).norm() >= r_)
            throw Error("DegenerateDomain", "T arc midpoint left B_r(z)");

        if (kind_ == Kind::Perturbed) {
            normalize_bump();
            check_perturbed();
        } else {
            eps_ = 0.0;
            bump_scale_ = 1.0;
        }
    }

    // Bump profile in u in [0,1].
    double raw_bump(double u) const {
        const double b = u * (1.0 - u);
        double s = 0.0;
        for (const auto& m : modes_) s += std::sin(m.k * M_PI * u + m.phase);
        return b * b * s;
    }
    double raw_bump_du(double u) const {
        const double b = u * (1.0 - u);
        const double db = 1.0 - 2.0 * u;
        double s = 0.0, ds = 0.0;
        for (const auto& m : modes_) {
            s += std::sin(m.k * M_PI * u + m.phase);
            ds += m.k * M_PI * std::cos(m.k * M_PI * u + m.phase);
        }
        return 2.0 * b * db * s + b * b * ds;
    }

    double rho(double s) const {
        if (kind_ == Kind::Cap) return r_;
        return r_ * (1.0 + eps_ * raw_bump(s) / bump_scale_);
    }
    // d rho / d s
    double rho_ds(double s) const {
        if (kind_ == Kind::Cap) return 0.0;
        return r_ * eps_ * raw_bump_du(s) / bump_scale_;
    }
    void normalize_bump() {
        double m = 0.0;
        const int n = 20001;
        for (int i = 0; i <= n; ++i) m = std::max(m, std::abs(raw_bump(double(i) / n)));
        if (m == 0.0) {
            kind_ = Kind::Cap;
            eps_ = 0.0;
            bump_scale_ = 1.0;
            return;
        }
        bump_scale_ = m;
    }

    void check_perturbed() const {
        const int n = 4096;
        for (int i = 1; i < n; ++i) {
            const double s = double(i) / n;
            if (rho(s) <= 0.0) throw Error("SelfIntersection", "perturbed radius crossed zero");
            const Vec2 x = sigma(s);
            if (x.norm() >= 1.0 - 1e-12 || x[1] <= 1e-12)
                throw Error("LeavesDomain", "perturbed Sigma left the upper half disk");
        }
    }

    template <class F>
    static double curve_length(F&& deriv) {
        // adaptive Simpson on |deriv|
        struct Rec {
            F& g;
            double operator()(double a, double b, double fa, double fm, double fb, double whole,
                              int depth) const {
                const double m = 0.5 * (a + b);
                const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
                const double flm = g(lm).norm(), frm = g(rm).norm();
                const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
                const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
                if (depth <= 0 || std::abs(left + right - whole) < 1e-12)
                    return left + right;
                return (*this)(a, m, fa, flm, fm, left, depth - 1) +
                       (*this)(m, b, fm, frm, fb, right, depth - 1);
            }
        };
        F g = std::forward<F>(deriv);
        Rec rec{g};
        const double fa = g(0.0).norm(), fm = g(0.5).norm(), fb = g(1.0).norm();
        const double whole = 1.0 / 6.0 * (fa + 4.0 * fm + fb);
        return rec(0.0, 1.0, fa, fm, fb, whole, 30);
    }

    CapSpec spec_;
    double eps_;
    std::vector<PerturbationMode> modes_;
    Kind kind_;
    Vec2 z_;
    double r_;
    Vec2 p1_, p2_;
    double phi1_, dphi_;
    double psi1_, dpsi_;
    double bump_scale_ = 1.0;
};

inline DomainBoundary cap_boundary(const CapSpec& spec) { return DomainBoundary::cap(spec); }

inline DomainBoundary perturbed_boundary(const CapSpec& spec, double eps,
                                         const std::vector<PerturbationMode>& modes) {
    return DomainBoundary::perturbed(spec, eps, modes);
}

struct CornerAngle {
    double theta;
    double conormal_cosine;  // <mu, nu_bar>, must match <N, -N_bar>
};

// Contact angle at a corner via both definitions: normal pairing and
// co-normal pairing.
inline CornerAngle contact_angle_at(const DomainBoundary& bdry, int corner_index) {
    const double s = (corner_index == 0) ? 0.0 : 1.0;
    const Vec2 x = bdry.corner(corner_index);

    Vec2 tau_sigma = bdry.sigma_deriv(s);
    if (tau_sigma.norm() < 1e-14) throw Error("DegenerateCorner", "vanishing Sigma tangent");
    tau_sigma.normalize();
    const Vec2 n_sigma = bdry.sigma_normal(s);  // N
    const Vec2 n_bar = x;                       // outward normal of the unit disk

    const Vec2 tau_t = bdry.t_arc_deriv(s).normalized();
    if (std::abs(tau_sigma.dot(rot90(tau_t))) < 1e-12)
        throw Error("DegenerateCorner", "tangents parallel at the corner");

    // mu: outward co-normal to Gamma within Sigma-bar; nu_bar: within T-bar.
    const Vec2 mu = (corner_index == 0) ? Vec2(-tau_sigma) : tau_sigma;
    const Vec2 nu_bar = (corner_index == 0) ? Vec2(-tau_t) : tau_t;

    const double cos_normals = n_sigma.dot(-n_bar);
    const double cos_conormals = mu.dot(nu_bar);
    if (std::abs(cos_normals - cos_conormals) > 1e-10)
        throw Error("DegenerateCorner", "normal and co-normal angle definitions disagree");
    return {std::acos(std::clamp(cos_normals, -1.0, 1.0)), cos_conormals};
}

inline nlohmann::json boundary_summary(const DomainBoundary& bdry) {
    nlohmann::json j;
    j["kind"] = (bdry.kind() == DomainBoundary::Kind::Cap) ? "cap" : "perturbed";
    j["eps"] = bdry.eps();
    j["corners"] = {{bdry.corner(0)[0], bdry.corner(0)[1]}, {bdry.corner(1)[0], bdry.corner(1)[1]}};
    j["theta"] = {contact_angle_at(bdry, 0).theta, contact_angle_at(bdry, 1).theta};
    j["sigma_arclength"] = bdry.sigma_arclength();
    j["t_arclength"] = bdry.t_arclength();
    return j;
}

}  // namespace serrinlab
