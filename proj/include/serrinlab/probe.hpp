#pragma once

#include <cmath>
#include <vector>

#include <json.hpp>

#include "serrinlab/identity.hpp"

namespace serrinlab {

// V-weighted L2 deviation of f_nu from its V-weighted mean over Sigma; zero
// exactly in the overdetermined (cap) case.
inline double rigidity_defect(const SigmaTrace& trace) {
    double num = 0.0, den = 0.0;
    for (const auto& s : trace.samples) {
        const double d = s.f_nu - trace.v_weighted_mean;
        num += d * d * s.v * s.w;
        den += s.v * s.w;
    }
    return std::sqrt(num / den);
}

inline double rigidity_defect(const FemSolution& sol) {
    return rigidity_defect(neumann_trace_sigma(sol));
}

struct SignCheck {
    double max_f;
    Vec2 argmax;
    bool interior_negative;  // all interior dofs < -1e-10
};

inline SignCheck sign_check(const FemSolution& sol) {
    const P2Space& space = *sol.space;
    std::vector<char> on_boundary(space.n_dofs(), 0);
    for (const auto& adj : space.bedge_adj)
        for (int k : adj.nodes) on_boundary[k] = 1;
    SignCheck out{-std::numeric_limits<double>::infinity(), Vec2::Zero(), true};
    for (int i = 0; i < space.n_dofs(); ++i) {
        if (sol.dofs[i] > out.max_f) {
            out.max_f = sol.dofs[i];
            out.argmax = space.node_pos[i];
        }
        if (!on_boundary[i] && !(sol.dofs[i] < -1e-10)) out.interior_negative = false;
    }
    return out;
}

struct ProbeRecord {
    double eps = 0.0;
    int mesh_level = 0;
    double h = 0.0;
    double defect = 0.0;
    double mean_fnu = 0.0;
    double lhs = 0.0;
    double max_f = 0.0;
    double theta_corners[2] = {0.0, 0.0};
    std::string error;  // nonempty if this entry failed
    std::vector<SigmaSample> profile;  // f_nu along Sigma, for rendering
};

inline ProbeRecord probe_case(const DomainBoundary& bdry, double c, int level, int base_ns = 16,
                              int base_nt = 8) {
    const Mesh mesh = generate(bdry, base_ns << level, base_nt << level);
    const P2Space space = build_p2_space(mesh);
    const FemSolution sol = solve_mixed(space, c);
    const SigmaTrace trace = neumann_trace_sigma(sol);
    ProbeRecord rec;
    rec.mesh_level = level;
    rec.h = mesh.max_diameter();
    rec.defect = rigidity_defect(trace);
    rec.mean_fnu = trace.v_weighted_mean;
    rec.lhs = identity_lhs(sol);
    rec.max_f = sign_check(sol).max_f;
    rec.theta_corners[0] = contact_angle_at(bdry, 0).theta;
    rec.theta_corners[1] = contact_angle_at(bdry, 1).theta;
    rec.profile = trace.samples;
    return rec;
}

// One record per eps at the finest level; per-entry failures are recorded,
// not fatal to the rest of the sweep.
inline std::vector<ProbeRecord> sweep(const CapSpec& spec, const std::vector<double>& eps_list,
                                      int levels, const std::vector<PerturbationMode>& modes = {{2, 0.0}}) {
    std::vector<ProbeRecord> records;
    for (double eps : eps_list) {
        ProbeRecord rec;
        rec.eps = eps;
        try {
            const DomainBoundary bdry = (eps == 0.0) ? cap_boundary(spec)
                                                     : perturbed_boundary(spec, eps, modes);
            rec = probe_case(bdry, spec.c, levels - 1);
            rec.eps = eps;
        } catch (const Error& err) {
            rec.mesh_level = levels - 1;
            rec.error = err.code();
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace serrinlab
