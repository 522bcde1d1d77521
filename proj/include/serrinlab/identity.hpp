#pragma once

#include <cmath>
#include <vector>

#include <json.hpp>

#include "serrinlab/fem.hpp"

namespace serrinlab {

// ---- quadrature helpers over a solved case -------------------------------------

// integral of V = x_2 over the meshed domain (isoparametric element quadrature)
inline double integral_v_omega(const P2Space& space) {
    double acc = 0.0;
    Eigen::VectorXd empty;
    for (int e = 0; e < int(space.elem_nodes.size()); ++e)
        for (const auto& q : tri_quad_deg5()) {
            const ElementEval ev = eval_element(space, e, empty, q.l1, q.l2);
            acc += 0.5 * q.w * ev.det_jac * ev.position[1];
        }
    return acc;
}

template <class F>
inline double integral_on_curve(const P2Space& space, EdgeTag tag, F&& integrand) {
    const DomainBoundary& bdry = *space.bdry;
    double acc = 0.0;
    for (int be = 0; be < int(space.mesh->boundary_edges.size()); ++be) {
        const auto& edge = space.mesh->boundary_edges[be];
        if (edge.tag != tag) continue;
        for (const auto& q : line_quad_5()) {
            const double s = edge.s0 + q.x * (edge.s1 - edge.s0);
            const double jarc = (tag == EdgeTag::Sigma ? bdry.sigma_deriv(s) : bdry.t_arc_deriv(s))
                                    .norm() *
                                (edge.s1 - edge.s0);
            acc += q.w * jarc * integrand(be, s, q.x);
        }
    }
    return acc;
}

// R(c, Omega) = d * (int_Omega V dx - c int_T V dA) / int_Sigma V dA, d = 2.
inline double reference_radius(const P2Space& space, double c) {
    if (!space.bdry) throw Error("MeshInvalid", "exact boundary required");
    const double vol = integral_v_omega(space);
    const double v_t = integral_on_curve(space, EdgeTag::T, [&](int, double s, double) {
        return space.bdry->t_arc(s)[1];
    });
    const double v_sigma = integral_on_curve(space, EdgeTag::Sigma, [&](int, double s, double) {
        return space.bdry->sigma(s)[1];
    });
    return 2.0 * (vol - c * v_t) / v_sigma;
}

// LHS of the integral identity: int_Omega -V f { |H|^2 - (tr H)^2 / 2 } dx with
// the discrete Hessian throughout, so the integrand is a true trace-free-Hessian
// norm at the discrete level.
inline double identity_lhs(const FemSolution& sol) {
    const P2Space& space = *sol.space;
    double acc = 0.0;
    for (int e = 0; e < int(space.elem_nodes.size()); ++e)
        for (const auto& q : tri_quad_deg5()) {
            const ElementEval ev = eval_element(space, e, sol.dofs, q.l1, q.l2);
            const double tr = ev.hessian.trace();
            const double tracefree = ev.hessian.squaredNorm() - 0.5 * tr * tr;
            acc += 0.5 * q.w * ev.det_jac * (-ev.position[1] * ev.value * tracefree);
        }
    return acc;
}

inline void check_gauge(const FemSolution& sol, const AuxQuadratic& aux) {
    if (aux.d != 2 || std::abs(aux.c - sol.c) > 1e-14)
        throw Error("GaugeMismatch", "auxiliary quadratic was built for a different c");
}

// RHS: 1/2 int_Sigma (|grad f|^2 - (R/2)^2) [V (f - ghat)_nu - V_nu (f - ghat)] dA,
// with exact positions/normals on Sigma and the FE trace for f.
inline double identity_rhs(const FemSolution& sol, double big_r, const AuxQuadratic& aux) {
    check_gauge(sol, aux);
    const P2Space& space = *sol.space;
    const double r_half = big_r / 2.0;
    return 0.5 * integral_on_curve(space, EdgeTag::Sigma, [&](int be, double s, double xi) {
        const Vec2 x = space.bdry->sigma(s);
        const Vec2 nu = space.bdry->sigma_normal(s);
        const ElementEval ev = eval_on_boundary_edge(space, sol.dofs, be, xi);
        Vec xg(2);
        xg << x[0], x[1];
        const Vec gg = aux.gradient(xg);
        const Vec2 diff_grad = ev.gradient - Vec2(gg[0], gg[1]);
        const double diff_val = ev.value - aux.value(xg);
        const double bracket = x[1] * diff_grad.dot(nu) - nu[1] * diff_val;
        return (ev.gradient.squaredNorm() - r_half * r_half) * bracket;
    });
}

struct ClosureResult {
    double integral;       // over the whole boundary
    double t_pointwise_max;  // max |V (f-ghat)_nu - V_nu (f-ghat)| on T
};

// int_{dOmega} [V (f - ghat)_nu - V_nu (f - ghat)] dA; vanishes analytically by
// the divergence theorem, and pointwise on T by the shared Robin condition.
inline ClosureResult closure_integral(const FemSolution& sol, const AuxQuadratic& aux) {
    check_gauge(sol, aux);
    const P2Space& space = *sol.space;
    auto bracket_sigma = [&](int be, double s, double xi) {
        const Vec2 x = space.bdry->sigma(s);
        const Vec2 nu = space.bdry->sigma_normal(s);
        const ElementEval ev = eval_on_boundary_edge(space, sol.dofs, be, xi);
        Vec xg(2);
        xg << x[0], x[1];
        const Vec gg = aux.gradient(xg);
        return x[1] * (ev.gradient - Vec2(gg[0], gg[1])).dot(nu) - nu[1] * (ev.value - aux.value(xg));
    };
    double t_max = 0.0;
    auto bracket_t = [&](int be, double s, double xi) {
        const Vec2 x = space.bdry->t_arc(s);  // nu = x, V_nu = <e2, x> = V on T
        const ElementEval ev = eval_on_boundary_edge(space, sol.dofs, be, xi);
        Vec xg(2);
        xg << x[0], x[1];
        const Vec gg = aux.gradient(xg);
        const double val =
            x[1] * (ev.gradient - Vec2(gg[0], gg[1])).dot(x) - x[1] * (ev.value - aux.value(xg));
        t_max = std::max(t_max, std::abs(val));
        return val;
    };
    const double total = integral_on_curve(space, EdgeTag::Sigma, bracket_sigma) +
                         integral_on_curve(space, EdgeTag::T, bracket_t);
    return {total, t_max};
}

// The four ghat gauges used by the spread diagnostics:
// R^ in {0, 1} crossed with the axis direction and a 30-degree tilt of it.
inline std::vector<AuxQuadratic> gauge_family(const DomainBoundary& bdry, double c) {
    const Vec2 u0 = bdry.center().normalized();
    const double tilt = M_PI / 6.0;
    const Vec2 u1(std::cos(tilt) * u0[0] - std::sin(tilt) * u0[1],
                  std::sin(tilt) * u0[0] + std::cos(tilt) * u0[1]);
    std::vector<AuxQuadratic> gauges;
    for (double r_hat : {0.0, 1.0})
        for (const Vec2& u : {u0, u1}) {
            Vec uu(2);
            uu << u[0], u[1];
            gauges.push_back(make_aux(2, c, r_hat, uu));
        }
    return gauges;
}

struct IdentityReport {
    double lhs = 0.0;
    std::vector<std::pair<double, double>> rhs_at_r;  // (R, rhs)
    double closure = 0.0;
    double closure_t_max = 0.0;
    double gauge_spread = 0.0;
    double reference_radius = 0.0;
    double deficit = 0.0;  // |lhs - rhs(R*)| at R* = reference radius
    int mesh_level = 0;
    double h = 0.0;
    int n_dofs = 0;
};

inline IdentityReport identity_report_level(const FemSolution& sol, int level) {
    const P2Space& space = *sol.space;
    IdentityReport rep;
    rep.mesh_level = level;
    rep.h = space.mesh->max_diameter();
    rep.n_dofs = space.n_dofs();
    rep.reference_radius = reference_radius(space, sol.c);
    rep.lhs = identity_lhs(sol);

    const AuxQuadratic aux0 = gauge_family(*space.bdry, sol.c).front();
    for (double r : {rep.reference_radius, 0.0, 2.0 * rep.reference_radius})
        rep.rhs_at_r.emplace_back(r, identity_rhs(sol, r, aux0));

    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& g : gauge_family(*space.bdry, sol.c)) {
        const double v = identity_rhs(sol, rep.reference_radius, g);
        if (first) {
            lo = hi = v;
            first = false;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    rep.gauge_spread = hi - lo;

    const ClosureResult cl = closure_integral(sol, aux0);
    rep.closure = cl.integral;
    rep.closure_t_max = cl.t_pointwise_max;
    rep.deficit = std::abs(rep.lhs - rep.rhs_at_r.front().second);
    return rep;
}

// Solves on geometrically refined meshes (base 16x8, doubled per level).
inline std::vector<IdentityReport> identity_report(const DomainBoundary& bdry, double c,
                                                   int levels, int base_ns = 16, int base_nt = 8) {
    if (levels < 1) throw Error("BadResolution", "levels must be >= 1");
    std::vector<IdentityReport> reports;
    for (int level = 0; level < levels; ++level) {
        const Mesh mesh = generate(bdry, base_ns << level, base_nt << level);
        const P2Space space = build_p2_space(mesh);
        const FemSolution sol = solve_mixed(space, c);
        reports.push_back(identity_report_level(sol, level));
    }
    return reports;
}

inline nlohmann::json to_json(const IdentityReport& rep) {
    nlohmann::json j;
    j["level"] = rep.mesh_level;
    j["h"] = rep.h;
    j["n_dofs"] = rep.n_dofs;
    j["lhs"] = rep.lhs;
    nlohmann::json rr = nlohmann::json::array();
    for (const auto& [r, v] : rep.rhs_at_r) rr.push_back({{"R", r}, {"rhs", v}});
    j["rhs_at_R"] = rr;
    j["closure"] = rep.closure;
    j["closure_t_max"] = rep.closure_t_max;
    j["gauge_spread"] = rep.gauge_spread;
    j["ref_radius"] = rep.reference_radius;
    j["deficit"] = rep.deficit;
    return j;
}

}  // namespace serrinlab
