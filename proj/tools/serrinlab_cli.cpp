// serrinlab: build lens domains, solve the mixed problem, check the integral
// identity, and run rigidity probes.
//
// Subcommands: case, convergence, sweep, render-mesh.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "serrinlab/identity.hpp"
#include "serrinlab/probe.hpp"
#include "serrinlab/report.hpp"
#include "serrinlab/svg.hpp"

namespace fs = std::filesystem;
using namespace serrinlab;

namespace {

struct CaseConfig {
    double c0 = 0.3;
    double c = -0.15;
    int dim = 2;
    double tilt = 0.0;
    double eps = 0.0;
    std::string modes_str = "2:0";
    int levels = 3;
    std::string out = ".";
    std::string emit_str = "csv,json";
    std::string eps_list_str;
    std::string config_path;
    unsigned seed = 0;

    std::vector<PerturbationMode> modes() const {
        std::vector<PerturbationMode> out_modes;
        std::stringstream ss(modes_str);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw Error("BadConfig", "mode must be k:phase, got '" + item + "'");
            out_modes.push_back({std::stoi(item.substr(0, colon)),
                                 std::stod(item.substr(colon + 1))});
            if (out_modes.back().k < 1) throw Error("BadConfig", "mode index k must be >= 1");
        }
        return out_modes;
    }

    std::set<std::string> emit() const {
        std::set<std::string> kinds;
        std::stringstream ss(emit_str);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            if (item != "json" && item != "csv" && item != "svg" && item != "mesh")
                throw Error("BadConfig", "unknown emit kind '" + item + "'");
            kinds.insert(item);
        }
        return kinds;
    }

    std::vector<double> eps_list() const {
        std::vector<double> out_list;
        std::stringstream ss(eps_list_str);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            out_list.push_back(std::stod(item));
        }
        return out_list;
    }

    fs::path out_dir() const {
        if (const char* env = std::getenv("SERRINLAB_OUT")) return fs::path(env);
        return fs::path(out);
    }
};

void load_config_file(CaseConfig& cfg, const CLI::App& cmd) {
    if (cfg.config_path.empty()) return;
    std::ifstream is(cfg.config_path);
    if (!is) throw Error("BadConfig", "cannot open config file " + cfg.config_path);
    nlohmann::json j;
    is >> j;
    // flags given on the command line win over config fields
    auto take = [&](const char* flag, const char* key, auto& slot) {
        const CLI::Option* opt = cmd.get_option_no_throw(flag);
        const bool flag_given = opt && opt->count() > 0;
        if (!flag_given && j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    take("--c0", "c0", cfg.c0);
    take("--c", "c", cfg.c);
    take("--dim", "d", cfg.dim);
    take("--tilt", "tilt", cfg.tilt);
    take("--eps", "eps", cfg.eps);
    take("--modes", "modes", cfg.modes_str);
    take("--levels", "levels", cfg.levels);
    take("--out", "out", cfg.out);
    take("--emit", "emit", cfg.emit_str);
    take("--eps-list", "eps_list", cfg.eps_list_str);
}

void add_common_flags(CLI::App* cmd, CaseConfig& cfg) {
    cmd->add_option("--c0", cfg.c0, "Neumann constant c0 (> 0)");
    cmd->add_option("--c", cfg.c, "Robin constant c (|c| < c0)");
    cmd->add_option("--dim", cfg.dim, "ambient dimension (FEM commands require 2)");
    cmd->add_option("--tilt", cfg.tilt, "rotation of the cap axis in the (e1,e2) plane");
    cmd->add_option("--eps", cfg.eps, "perturbation amplitude");
    cmd->add_option("--modes", cfg.modes_str, "perturbation modes 'k:phase,k:phase,...'");
    cmd->add_option("--levels", cfg.levels, "number of refinement levels (1..6)")
        ->check(CLI::Range(1, 6));
    cmd->add_option("--out", cfg.out,
                    "output directory (env SERRINLAB_OUT overrides this flag)");
    cmd->add_option("--emit", cfg.emit_str, "artifact kinds: subset of json,csv,svg,mesh");
    cmd->add_option("--eps-list", cfg.eps_list_str, "comma-separated eps values (sweep)");
    cmd->add_option("--seed", cfg.seed, "seed for optional randomized diagnostics");
    cmd->add_option("--config", cfg.config_path, "JSON config file; flags override its fields");
}

struct SolvedLevel {
    Mesh mesh;
    P2Space space;
    FemSolution sol;
    IdentityReport report;
};

// one refinement level, keeping the mesh/space alive next to the solution
std::unique_ptr<SolvedLevel> solve_level(const DomainBoundary& bdry, double c, int level) {
    auto out = std::make_unique<SolvedLevel>();
    out->mesh = generate(bdry, 16 << level, 8 << level);
    out->space = build_p2_space(out->mesh);
    out->sol = solve_mixed(out->space, c);
    out->sol.space = &out->space;
    out->report = identity_report_level(out->sol, level);
    return out;
}

DomainBoundary make_boundary(const CaseConfig& cfg, const CapSpec& spec) {
    if (cfg.eps == 0.0) return cap_boundary(spec);
    return perturbed_boundary(spec, cfg.eps, cfg.modes());
}

int cmd_case(const CaseConfig& cfg) {
    if (cfg.dim != 2) throw Error("BadConfig", "the case pipeline is d = 2 only");
    const CapSpec spec = cap_from_constants(cfg.dim, cfg.c0, cfg.c, cfg.tilt);
    const DomainBoundary bdry = make_boundary(cfg, spec);

    std::vector<IdentityReport> reports;
    std::unique_ptr<SolvedLevel> finest;
    for (int level = 0; level < cfg.levels; ++level) {
        finest = solve_level(bdry, spec.c, level);
        reports.push_back(finest->report);
    }
    const SigmaTrace trace = neumann_trace_sigma(finest->sol);
    const SignCheck sc = sign_check(finest->sol);

    const fs::path dir = cfg.out_dir();
    fs::create_directories(dir);
    const auto kinds = cfg.emit();
    if (kinds.count("csv")) write_file_atomic(dir / "case.csv", identity_csv(reports));
    if (kinds.count("json")) {
        nlohmann::json j;
        j["spec"] = to_json(spec);
        j["boundary"] = boundary_summary(bdry);
        j["levels"] = nlohmann::json::array();
        for (const auto& r : reports) j["levels"].push_back(to_json(r));
        j["probe"] = {{"defect", rigidity_defect(trace)},
                      {"mean_fnu", trace.v_weighted_mean},
                      {"max_f", sc.max_f},
                      {"interior_negative", sc.interior_negative},
                      {"condition_estimate", finest->sol.condition_estimate},
                      {"t_empty", finest->sol.t_empty}};
        write_file_atomic(dir / "case.json", j.dump(2) + "\n");
    }
    if (kinds.count("svg")) {
        write_file_atomic(dir / "case.svg", svg_scalar_field(finest->space, finest->sol.dofs));
        write_file_atomic(dir / "case_fnu.svg", svg_profile(trace.samples));
    }
    if (kinds.count("mesh")) write_file_atomic(dir / "case.mesh", write_mesh_text(finest->mesh));
    return 0;
}

int cmd_convergence(const CaseConfig& cfg) {
    if (cfg.dim != 2) throw Error("BadConfig", "the convergence pipeline is d = 2 only");
    if (cfg.eps != 0.0) throw Error("BadConfig", "convergence requires exact solution (eps=0)");
    const CapSpec spec = cap_from_constants(cfg.dim, cfg.c0, cfg.c, cfg.tilt);
    const DomainBoundary bdry = cap_boundary(spec);
    const QuadraticSolution exact = QuadraticSolution::for_cap(spec);

    std::vector<ConvergenceRow> rows;
    for (int level = 0; level < cfg.levels; ++level) {
        auto solved = solve_level(bdry, spec.c, level);
        rows.push_back({level, solved->mesh.max_diameter(), error_norms(solved->sol, exact)});
    }
    const fs::path dir = cfg.out_dir();
    fs::create_directories(dir);
    write_file_atomic(dir / "convergence.csv", convergence_csv(rows));
    return 0;
}

int cmd_sweep(const CaseConfig& cfg) {
    if (cfg.dim != 2) throw Error("BadConfig", "the sweep pipeline is d = 2 only");
    const auto eps_values = cfg.eps_list();
    if (eps_values.empty()) throw Error("BadConfig", "sweep needs a nonempty --eps-list");
    const CapSpec spec = cap_from_constants(cfg.dim, cfg.c0, cfg.c, cfg.tilt);
    const auto records = sweep(spec, eps_values, cfg.levels, cfg.modes());

    const fs::path dir = cfg.out_dir();
    fs::create_directories(dir);
    write_file_atomic(dir / "sweep.csv", probe_csv(records));
    if (cfg.emit().count("svg")) {
        for (size_t i = 0; i < records.size(); ++i) {
            if (!records[i].error.empty()) continue;
            write_file_atomic(dir / ("sweep_" + std::to_string(i) + "_fnu.svg"),
                              svg_profile(records[i].profile));
        }
    }
    return 0;
}

int cmd_render_mesh(const CaseConfig& cfg) {
    if (cfg.dim != 2) throw Error("BadConfig", "meshes are d = 2 only");
    const CapSpec spec = cap_from_constants(cfg.dim, cfg.c0, cfg.c, cfg.tilt);
    const DomainBoundary bdry = make_boundary(cfg, spec);
    const Mesh mesh = generate(bdry, 16 << (cfg.levels - 1), 8 << (cfg.levels - 1));
    const fs::path dir = cfg.out_dir();
    fs::create_directories(dir);
    write_file_atomic(dir / "mesh.svg", svg_mesh(mesh));
    if (cfg.emit().count("mesh")) write_file_atomic(dir / "mesh.txt", write_mesh_text(mesh));
    return 0;
}

int exit_code_for(const Error& err) {
    const std::string& code = err.code();
    if (code == "SingularSystem" || code == "InvertedElement" || code == "MeshInvalid" ||
        code == "OutsideDomain")
        return 3;
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serrinlab: capillary-cap mixed problems, integral identity, rigidity probes"};
    app.require_subcommand(1);

    CaseConfig cfg;
    CLI::App* c_case = app.add_subcommand("case", "full pipeline for one domain");
    CLI::App* c_conv = app.add_subcommand("convergence", "error norms against the closed form");
    CLI::App* c_sweep = app.add_subcommand("sweep", "rigidity probe over an eps list");
    CLI::App* c_mesh = app.add_subcommand("render-mesh", "emit an SVG of the mesh");
    for (CLI::App* cmd : {c_case, c_conv, c_sweep, c_mesh}) add_common_flags(cmd, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 64;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        load_config_file(cfg, *active);
        if (active == c_case) return cmd_case(cfg);
        if (active == c_conv) return cmd_convergence(cfg);
        if (active == c_sweep) return cmd_sweep(cfg);
        return cmd_render_mesh(cfg);
    } catch (const Error& err) {
        nlohmann::json j{{"error", err.code()}, {"message", err.what()}};
        std::cerr << j.dump() << "\n";
        return exit_code_for(err);
    } catch (const std::exception& ex) {
        nlohmann::json j{{"error", "Internal"}, {"message", ex.what()}};
        std::cerr << j.dump() << "\n";
        return 3;
    }
}
