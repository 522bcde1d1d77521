#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "serrinlab/closed_form.hpp"
#include "serrinlab/error.hpp"
#include "serrinlab/mesh.hpp"
#include "serrinlab/quadrature.hpp"

namespace serrinlab {

using Mat2 = Eigen::Matrix2d;
using SparseMat = Eigen::SparseMatrix<double>;

// ---- P2 reference element --------------------------------------------------

// Nodes: vertices (0,0),(1,0),(0,1); midpoints of edges (01),(12),(20).
inline void p2_shapes(double xi, double eta, std::array<double, 6>& n) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    n[0] = l0 * (2.0 * l0 - 1.0);
    n[1] = l1 * (2.0 * l1 - 1.0);
    n[2] = l2 * (2.0 * l2 - 1.0);
    n[3] = 4.0 * l0 * l1;
    n[4] = 4.0 * l1 * l2;
    n[5] = 4.0 * l2 * l0;
}

inline void p2_shape_grads(double xi, double eta, std::array<Vec2, 6>& g) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    const Vec2 d0(-1.0, -1.0), d1(1.0, 0.0), d2(0.0, 1.0);
    g[0] = (4.0 * l0 - 1.0) * d0;
    g[1] = (4.0 * l1 - 1.0) * d1;
    g[2] = (4.0 * l2 - 1.0) * d2;
    g[3] = 4.0 * (l0 * d1 + l1 * d0);
    g[4] = 4.0 * (l1 * d2 + l2 * d1);
    g[5] = 4.0 * (l2 * d0 + l0 * d2);
}

// Second derivatives of the quadratic shapes are constant.
inline const std::array<Mat2, 6>& p2_shape_hessians() {
    static const std::array<Mat2, 6> h = [] {
        const Vec2 d0(-1.0, -1.0), d1(1.0, 0.0), d2(0.0, 1.0);
        std::array<Mat2, 6> out;
        out[0] = 4.0 * d0 * d0.transpose();
        out[1] = 4.0 * d1 * d1.transpose();
        out[2] = 4.0 * d2 * d2.transpose();
        out[3] = 4.0 * (d0 * d1.transpose() + d1 * d0.transpose());
        out[4] = 4.0 * (d1 * d2.transpose() + d2 * d1.transpose());
        out[5] = 4.0 * (d2 * d0.transpose() + d0 * d2.transpose());
        return out;
    }();
    return h;
}

// 1-D quadratic traces along an edge, xi in [0,1] from node a to node b
// through the midpoint m.
inline void p2_edge_shapes(double xi, std::array<double, 3>& n) {
    n[0] = (1.0 - xi) * (1.0 - 2.0 * xi);  // a
    n[1] = 4.0 * xi * (1.0 - xi);          // m
    n[2] = xi * (2.0 * xi - 1.0);          // b
}

// ---- P2 space over a lens mesh ----------------------------------------------

struct P2Space {
    const Mesh* mesh = nullptr;
    const DomainBoundary* bdry = nullptr;  // null for read-in meshes
    int n_vertices = 0;
    std::vector<Vec2> node_pos;                   // vertices then edge midpoints
    std::vector<std::array<int, 6>> elem_nodes;   // per triangle
    std::vector<char> node_on_sigma;

    struct BoundaryAdj {
        int elem;
        int local_edge;   // 0:(v0,v1) 1:(v1,v2) 2:(v2,v0)
        bool reversed;    // true if the curve order (a->b) opposes the local order
        std::array<int, 3> nodes;  // a, mid, b dofs in curve order
    };
    std::vector<BoundaryAdj> bedge_adj;  // parallel to mesh->boundary_edges

    int n_dofs() const { return int(node_pos.size()); }

    // reference coordinates of a point on a local edge, t in [0,1] from the
    // edge's first local vertex to its second
    static Vec2 edge_ref_point(int local_edge, double t) {
        switch (local_edge) {
            case 0: return Vec2(t, 0.0);
            case 1: return Vec2(1.0 - t, t);
            default: return Vec2(0.0, 1.0 - t);
        }
    }
};

inline P2Space build_p2_space(const Mesh& mesh) {
    P2Space space;
    space.mesh = &mesh;
    space.bdry = mesh.source;
    space.n_vertices = int(mesh.vertices.size());
    space.node_pos = mesh.vertices;

    std::map<std::pair<int, int>, int> edge_dof;
    std::map<std::pair<int, int>, std::pair<int, int>> edge_elem;  // -> (elem, local)
    auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };

    for (int e = 0; e < int(mesh.triangles.size()); ++e) {
        const auto& t = mesh.triangles[e];
        std::array<int, 6> nodes{t[0], t[1], t[2], -1, -1, -1};
        for (int le = 0; le < 3; ++le) {
            const int a = t[le], b = t[(le + 1) % 3];
            auto k = key(a, b);
            auto it = edge_dof.find(k);
            if (it == edge_dof.end()) {
                const int dof = int(space.node_pos.size());
                space.node_pos.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
                it = edge_dof.emplace(k, dof).first;
                edge_elem[k] = {e, le};
            } else {
                edge_elem.erase(k);  // shared edge: interior
            }
            nodes[3 + le] = it->second;
        }
        space.elem_nodes.push_back(nodes);
    }

    space.node_on_sigma.assign(space.node_pos.size(), 0);
    space.bedge_adj.resize(mesh.boundary_edges.size());
    for (int be = 0; be < int(mesh.boundary_edges.size()); ++be) {
        const auto& edge = mesh.boundary_edges[be];
        auto k = key(edge.a, edge.b);
        auto dit = edge_dof.find(k);
        auto eit = edge_elem.find(k);
        if (dit == edge_dof.end() || eit == edge_elem.end())
            throw Error("MeshInvalid", "boundary edge not matched by exactly one triangle");
        const int mid_dof = dit->second;
        space.node_pos[mid_dof] = edge.mid;  // snap to the exact curve
        const auto [elem, local] = eit->second;
        const auto& t = mesh.triangles[elem];
        const bool reversed = (t[local] != edge.a);
        space.bedge_adj[be] = {elem, local, reversed, {edge.a, mid_dof, edge.b}};
        if (edge.tag == EdgeTag::Sigma) {
            space.node_on_sigma[edge.a] = 1;
            space.node_on_sigma[edge.b] = 1;
            space.node_on_sigma[mid_dof] = 1;
        }
    }
    return space;
}

struct ElementEval {
    double value;
    Vec2 gradient;
    Mat2 hessian;
    Vec2 position;
    double det_jac;
};

inline ElementEval eval_element(const P2Space& space, int elem, const Eigen::VectorXd& dofs,
                                double xi, double eta) {
    const auto& nodes = space.elem_nodes[elem];
    std::array<double, 6> n;
    std::array<Vec2, 6> gref;
    p2_shapes(xi, eta, n);
    p2_shape_grads(xi, eta, gref);
    const auto& href = p2_shape_hessians();

    Vec2 x = Vec2::Zero();
    Mat2 jac = Mat2::Zero();
    Mat2 map_hess_x = Mat2::Zero(), map_hess_y = Mat2::Zero();
    double value = 0.0;
    Vec2 gval = Vec2::Zero();
    Mat2 hval = Mat2::Zero();
    for (int i = 0; i < 6; ++i) {
        const Vec2& p = space.node_pos[nodes[i]];
        const double c = dofs.size() ? dofs[nodes[i]] : 0.0;
        x += n[i] * p;
        jac += p * gref[i].transpose();
        map_hess_x += p[0] * href[i];
        map_hess_y += p[1] * href[i];
        value += c * n[i];
        gval += c * gref[i];
        hval += c * href[i];
    }
    const double det = jac.determinant();
    const Mat2 jinv = jac.inverse();
    const Vec2 grad = jinv.transpose() * gval;
    const Mat2 hess =
        jinv.transpose() * (hval - grad[0] * map_hess_x - grad[1] * map_hess_y) * jinv;
    return {value, grad, hess, x, det};
}

// ---- assembly and solve ------------------------------------------------------

struct AssembledSystem {
    SparseMat matrix;          // after symmetric elimination of Sigma dofs
    Eigen::VectorXd rhs;
    SparseMat matrix_raw;      // before elimination
    Eigen::VectorXd rhs_raw;
    std::vector<char> constrained;
    bool t_empty = false;
};

inline AssembledSystem assemble_mixed(const P2Space& space, double c) {
    const int n = space.n_dofs();
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);

    // volume terms: grad-grad stiffness, load -1
    for (int e = 0; e < int(space.elem_nodes.size()); ++e) {
        const auto& nodes = space.elem_nodes[e];
        Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> fe = Eigen::Matrix<double, 6, 1>::Zero();
        for (const auto& q : tri_quad_deg5()) {
            const double xi = q.l1, eta = q.l2;
            std::array<double, 6> nsh;
            std::array<Vec2, 6> gref;
            p2_shapes(xi, eta, nsh);
            p2_shape_grads(xi, eta, gref);
            Mat2 jac = Mat2::Zero();
            for (int i = 0; i < 6; ++i)
                jac += space.node_pos[nodes[i]] * gref[i].transpose();
            const double det = jac.determinant();
            if (det <= 0.0) throw Error("InvertedElement", "non-positive isoparametric Jacobian");
            const Mat2 jinvT = jac.inverse().transpose();
            const double w = 0.5 * q.w * det;
            std::array<Vec2, 6> gx;
            for (int i = 0; i < 6; ++i) gx[i] = jinvT * gref[i];
            for (int i = 0; i < 6; ++i) {
                fe[i] -= w * nsh[i];  // -int phi
                for (int j = 0; j < 6; ++j) ke(i, j) += w * gx[i].dot(gx[j]);
            }
        }
        for (int i = 0; i < 6; ++i) {
            b[nodes[i]] += fe[i];
            for (int j = 0; j < 6; ++j) trips.emplace_back(nodes[i], nodes[j], ke(i, j));
        }
    }

    // Robin terms on T: -int_T u v, rhs + c int_T v, on the exact curve when
    // available, else on the quadratic edge geometry
    bool has_t = false;
    for (int be = 0; be < int(space.mesh->boundary_edges.size()); ++be) {
        const auto& edge = space.mesh->boundary_edges[be];
        if (edge.tag != EdgeTag::T) continue;
        has_t = true;
        const auto& adj = space.bedge_adj[be];
        for (const auto& q : line_quad_5()) {
            double jarc;
            if (space.bdry) {
                const double s = edge.s0 + q.x * (edge.s1 - edge.s0);
                jarc = space.bdry->t_arc_deriv(s).norm() * (edge.s1 - edge.s0);
            } else {
                // quadratic edge through (a, mid, b)
                const Vec2 a = space.node_pos[adj.nodes[0]], m = space.node_pos[adj.nodes[1]],
                           bb = space.node_pos[adj.nodes[2]];
                const Vec2 d = (4.0 * q.x - 3.0) * a + (4.0 - 8.0 * q.x) * m +
                               (4.0 * q.x - 1.0) * bb;
                jarc = d.norm();
            }
            std::array<double, 3> tr;
            p2_edge_shapes(q.x, tr);
            const double w = q.w * jarc;
            for (int i = 0; i < 3; ++i) {
                b[adj.nodes[i]] += c * w * tr[i];
                for (int j = 0; j < 3; ++j)
                    trips.emplace_back(adj.nodes[i], adj.nodes[j], -w * tr[i] * tr[j]);
            }
        }
    }

    AssembledSystem sys;
    sys.t_empty = !has_t;
    sys.matrix_raw.resize(n, n);
    sys.matrix_raw.setFromTriplets(trips.begin(), trips.end());
    sys.rhs_raw = b;

    sys.constrained.assign(n, 0);
    for (int i = 0; i < n; ++i) sys.constrained[i] = space.node_on_sigma[i];

    std::vector<Eigen::Triplet<double>> trips2;
    trips2.reserve(trips.size());
    for (const auto& t : trips)
        if (!sys.constrained[t.row()] && !sys.constrained[t.col()]) trips2.push_back(t);
    for (int i = 0; i < n; ++i)
        if (sys.constrained[i]) {
            trips2.emplace_back(i, i, 1.0);
            b[i] = 0.0;  // homogeneous Dirichlet
        }
    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(trips2.begin(), trips2.end());
    sys.rhs = b;
    return sys;
}

struct FemSolution {
    const P2Space* space = nullptr;
    Eigen::VectorXd dofs;
    double c = 0.0;
    double linear_residual = 0.0;
    double condition_estimate = 0.0;
    bool t_empty = false;
};

// Hager-style 1-norm condition estimate; the eliminated matrix is symmetric,
// so transpose solves reuse the same factorization.
inline double estimate_condition(const SparseMat& a, const Eigen::SparseLU<SparseMat>& lu) {
    const int n = int(a.rows());
    double norm_a = 0.0;
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMat::InnerIterator it(a, k); it; ++it) colsum[it.col()] += std::abs(it.value());
    norm_a = colsum.maxCoeff();

    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
    double est = 0.0;
    for (int iter = 0; iter < 3; ++iter) {
        Eigen::VectorXd y = lu.solve(x);
        est = y.lpNorm<1>();
        Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
        Eigen::VectorXd z = lu.solve(xi);
        int jmax;
        z.cwiseAbs().maxCoeff(&jmax);
        if (std::abs(z[jmax]) <= z.dot(x)) break;
        x.setZero();
        x[jmax] = 1.0;
    }
    return norm_a * est;
}

inline FemSolution solve_mixed(const P2Space& space, double c) {
    if (space.mesh->triangles.empty()) throw Error("MeshInvalid", "empty mesh");
    AssembledSystem sys = assemble_mixed(space, c);

    Eigen::SparseLU<SparseMat> lu;
    lu.compute(sys.matrix);
    if (lu.info() != Eigen::Success)
        throw Error("SingularSystem", "sparse factorization of the mixed system failed");

    FemSolution sol;
    sol.space = &space;
    sol.c = c;
    sol.t_empty = sys.t_empty;
    sol.dofs = lu.solve(sys.rhs);
    const double bnorm = sys.rhs.norm();
    sol.linear_residual = (sys.matrix * sol.dofs - sys.rhs).norm() / (bnorm > 0.0 ? bnorm : 1.0);
    sol.condition_estimate = estimate_condition(sys.matrix, lu);
    if (sol.linear_residual > 1e-10)
        throw Error("SingularSystem", "linear residual above tolerance; condition estimate " +
                                          std::to_string(sol.condition_estimate));
    return sol;
}

// ---- point evaluation ---------------------------------------------------------

inline ElementEval evaluate(const FemSolution& sol, const Vec2& x) {
    const P2Space& space = *sol.space;
    const Mesh& mesh = *space.mesh;
    // candidates ranked by barycentric inclusion in the straight vertex triangle
    std::vector<std::pair<double, int>> cand;
    for (int e = 0; e < int(mesh.triangles.size()); ++e) {
        const auto& t = mesh.triangles[e];
        const Vec2 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &cc = mesh.vertices[t[2]];
        const double area = signed_area(a, b, cc);
        const double l1 = signed_area(a, x, cc) / area;
        const double l2 = signed_area(a, b, x) / area;
        const double l0 = 1.0 - l1 - l2;
        const double m = std::min({l0, l1, l2});
        if (m > -0.25) cand.emplace_back(m, e);
    }
    std::sort(cand.rbegin(), cand.rend());
    if (cand.size() > 8) cand.resize(8);
    for (const auto& [score, e] : cand) {
        const auto& t = mesh.triangles[e];
        const Vec2 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &cc = mesh.vertices[t[2]];
        const double area = signed_area(a, b, cc);
        double xi = signed_area(a, x, cc) / area;
        double eta = signed_area(a, b, x) / area;
        // Newton on the isoparametric map
        for (int it = 0; it < 20; ++it) {
            std::array<double, 6> n;
            std::array<Vec2, 6> g;
            p2_shapes(xi, eta, n);
            p2_shape_grads(xi, eta, g);
            Vec2 fx = -x;
            Mat2 jac = Mat2::Zero();
            for (int i = 0; i < 6; ++i) {
                fx += n[i] * space.node_pos[space.elem_nodes[e][i]];
                jac += space.node_pos[space.elem_nodes[e][i]] * g[i].transpose();
            }
            if (fx.norm() < 1e-14) break;
            const Vec2 d = jac.inverse() * fx;
            xi -= d[0];
            eta -= d[1];
        }
        const double tol = 1e-9;
        if (xi >= -tol && eta >= -tol && xi + eta <= 1.0 + tol)
            return eval_element(space, e, sol.dofs, xi, eta);
    }
    throw Error("OutsideDomain", "point is not inside the meshed domain");
}

// ---- norms and traces ----------------------------------------------------------

struct ErrorNorms {
    double l2_rel;
    double h1_rel;
    double linf;
};

inline ErrorNorms error_norms(const FemSolution& sol, const QuadraticSolution& exact) {
    const P2Space& space = *sol.space;
    double e2 = 0.0, u2 = 0.0, eg2 = 0.0, ug2 = 0.0, linf = 0.0;
    for (int e = 0; e < int(space.elem_nodes.size()); ++e) {
        for (const auto& q : tri_quad_deg5()) {
            const ElementEval ev = eval_element(space, e, sol.dofs, q.l1, q.l2);
            const double w = 0.5 * q.w * ev.det_jac;
            Vec xg(2);
            xg << ev.position[0], ev.position[1];
            const double ue = exact.value(xg);
            const Vec ge = exact.gradient(xg);
            const double dv = ev.value - ue;
            const Vec2 dg = ev.gradient - Vec2(ge[0], ge[1]);
            e2 += w * dv * dv;
            u2 += w * ue * ue;
            eg2 += w * dg.squaredNorm();
            ug2 += w * (ge[0] * ge[0] + ge[1] * ge[1]);
            linf = std::max(linf, std::abs(dv));
        }
    }
    return {std::sqrt(e2 / u2), std::sqrt((e2 + eg2) / (u2 + ug2)), linf};
}

struct SigmaSample {
    double s;       // curve parameter
    double f_nu;    // <grad f_h, nu_exact>
    double v;       // weight V = x_2 on the exact curve
    double w;       // arc quadrature weight
};

struct SigmaTrace {
    std::vector<SigmaSample> samples;
    double v_weighted_mean = 0.0;
};

// Evaluates the FE solution's trace at reference points on the boundary edge.
inline ElementEval eval_on_boundary_edge(const P2Space& space, const Eigen::VectorXd& dofs,
                                         int bedge_index, double xi_curve) {
    const auto& adj = space.bedge_adj[bedge_index];
    const double t = adj.reversed ? 1.0 - xi_curve : xi_curve;
    const Vec2 ref = P2Space::edge_ref_point(adj.local_edge, t);
    return eval_element(space, adj.elem, dofs, ref[0], ref[1]);
}

inline SigmaTrace neumann_trace_sigma(const FemSolution& sol) {
    const P2Space& space = *sol.space;
    if (!space.bdry) throw Error("MeshInvalid", "exact boundary needed for Sigma traces");
    SigmaTrace trace;
    double num = 0.0, den = 0.0;
    for (int be = 0; be < int(space.mesh->boundary_edges.size()); ++be) {
        const auto& edge = space.mesh->boundary_edges[be];
        if (edge.tag != EdgeTag::Sigma) continue;
        for (const auto& q : line_quad_5()) {
            const double s = edge.s0 + q.x * (edge.s1 - edge.s0);
            const Vec2 nu = space.bdry->sigma_normal(s);
            const double jarc = space.bdry->sigma_deriv(s).norm() * (edge.s1 - edge.s0);
            const ElementEval ev = eval_on_boundary_edge(space, sol.dofs, be, q.x);
            const double fnu = ev.gradient.dot(nu);
            const double v = space.bdry->sigma(s)[1];
            const double w = q.w * jarc;
            trace.samples.push_back({s, fnu, v, w});
            num += fnu * v * w;
            den += v * w;
        }
    }
    trace.v_weighted_mean = num / den;
    return trace;
}

// Max over T quadrature points of |(I - nu nu^T) H nu| with the exact normal.
inline double tangential_hessian_on_T(const FemSolution& sol) {
    const P2Space& space = *sol.space;
    if (!space.bdry) throw Error("MeshInvalid", "exact boundary needed for T traces");
    double worst = 0.0;
    for (int be = 0; be < int(space.mesh->boundary_edges.size()); ++be) {
        const auto& edge = space.mesh->boundary_edges[be];
        if (edge.tag != EdgeTag::T) continue;
        for (const auto& q : line_quad_5()) {
            const double s = edge.s0 + q.x * (edge.s1 - edge.s0);
            const Vec2 nu = space.bdry->t_arc(s);  // nu(x) = x on T
            const ElementEval ev = eval_on_boundary_edge(space, sol.dofs, be, q.x);
            const Vec2 hnu = ev.hessian * nu;
            worst = std::max(worst, (hnu - nu.dot(hnu) * nu).norm());
        }
    }
    return worst;
}

}  // namespace serrinlab
