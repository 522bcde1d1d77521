#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "serrinlab/error.hpp"
#include "serrinlab/geom.hpp"

namespace serrinlab {

using Mat = Eigen::MatrixXd;

// f(x) = (|x - z|^2 - r^2) / (2d).  Laplacian is 1 and the Hessian is I/d.
struct QuadraticSolution {
    int d;
    Vec z;
    double r;

    static QuadraticSolution for_cap(const CapSpec& spec) { return {spec.d, spec.z, spec.r}; }

    double value(const Vec& x) const {
        check_dim(x);
        return ((x - z).squaredNorm() - r * r) / (2.0 * d);
    }
    Vec gradient(const Vec& x) const {
        check_dim(x);
        return (x - z) / double(d);
    }
    Mat hessian() const { return Mat::Identity(d, d) / double(d); }

    void check_dim(const Vec& x) const {
        if (x.size() != d) throw Error("DimensionMismatch", "point dimension != d");
    }
};

struct SolutionEval {
    double value;
    Vec gradient;
    Mat hessian;
};

inline SolutionEval eval_solution(const QuadraticSolution& sol, const Vec& x) {
    return {sol.value(x), sol.gradient(x), sol.hessian()};
}

// P = |grad f|^2 / 2 - f/d; constant c0^2/2 for the quadratic family.
inline double eval_P(const QuadraticSolution& sol, const Vec& x) {
    return 0.5 * sol.gradient(x).squaredNorm() - sol.value(x) / sol.d;
}

// Laplacian of P via |H|^2 - (tr H)^2/d with the umbilical Hessian; identically 0 here.
inline double eval_deltaP(const QuadraticSolution& sol) {
    const Mat h = sol.hessian();
    const double tr = h.trace();
    return h.squaredNorm() - tr * tr / sol.d;
}

enum class SampleTag { Interior, Sigma, T };

struct TaggedPoint {
    Vec x;
    SampleTag tag;
};

struct ResidualReport {
    double pde_max = 0.0;
    double dirichlet_max = 0.0;
    double robin_max = 0.0;
    double neumann_max = 0.0;
};

// Pointwise residuals of the mixed problem at tagged samples; tags are verified
// against their defining equations before use.
inline ResidualReport bvp_residuals(const QuadraticSolution& sol, const CapSpec& spec,
                                    const std::vector<TaggedPoint>& samples) {
    ResidualReport rep;
    const double tag_tol = 1e-10;
    for (const auto& tp : samples) {
        const Vec& x = tp.x;
        sol.check_dim(x);
        const double dist_z = (x - spec.z).norm();
        const double dist_o = x.norm();
        switch (tp.tag) {
            case SampleTag::Interior: {
                if (dist_z >= spec.r + tag_tol || dist_o >= 1.0 + tag_tol || x[spec.d - 1] <= -tag_tol)
                    throw Error("MistaggedSample", "interior sample outside Omega");
                const double lap = sol.hessian().trace();
                rep.pde_max = std::max(rep.pde_max, std::abs(lap - 1.0));
                break;
            }
            case SampleTag::Sigma: {
                if (std::abs(dist_z - spec.r) > tag_tol || dist_o >= 1.0 + tag_tol ||
                    x[spec.d - 1] <= -tag_tol)
                    throw Error("MistaggedSample", "Sigma sample not on {|x-z| = r} inside the ball");
                rep.dirichlet_max = std::max(rep.dirichlet_max, std::abs(sol.value(x)));
                const Vec nu = (x - spec.z) / spec.r;
                rep.neumann_max =
                    std::max(rep.neumann_max, std::abs(sol.gradient(x).dot(nu) - spec.c0));
                break;
            }
            case SampleTag::T: {
                if (std::abs(dist_o - 1.0) > tag_tol || dist_z >= spec.r + tag_tol)
                    throw Error("MistaggedSample", "T sample not on the unit sphere inside B_r(z)");
                // nu(x) = x on T
                rep.robin_max = std::max(
                    rep.robin_max, std::abs(sol.gradient(x).dot(x) - sol.value(x) - spec.c));
                break;
            }
        }
    }
    return rep;
}

// ghat(x) = (|x - O|^2 - R^2) / (2d) with |O|^2 = 1 + R^2 - 2dc, so that
// Laplacian ghat = 1 and ghat_nu - ghat = c on the unit sphere.
struct AuxQuadratic {
    int d;
    Vec o_hat;
    double r_hat;
    double c;  // the Robin constant it was built for

    double value(const Vec& x) const {
        return ((x - o_hat).squaredNorm() - r_hat * r_hat) / (2.0 * d);
    }
    Vec gradient(const Vec& x) const { return (x - o_hat) / double(d); }
};

inline AuxQuadratic make_aux(int d, double c, double r_hat, const Vec& u) {
    if (u.size() != d) throw Error("DimensionMismatch", "direction dimension != d");
    if (std::abs(u.norm() - 1.0) > 1e-12) throw Error("NonUnitDirection", "|u| != 1");
    const double disc = 1.0 + r_hat * r_hat - 2.0 * d * c;
    if (disc < 0.0)
        throw Error("NegativeDiscriminant", "1 + R^2 - 2dc < 0: no admissible center");
    AuxQuadratic aux;
    aux.d = d;
    aux.o_hat = std::sqrt(disc) * u;
    aux.r_hat = r_hat;
    aux.c = c;
    return aux;
}

// Default gauge: R^ = 0, direction z/|z|.
inline AuxQuadratic aux_for_spec(const CapSpec& spec) {
    return make_aux(spec.d, spec.c, 0.0, spec.z / spec.z_norm());
}

}  // namespace serrinlab
