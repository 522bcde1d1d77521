#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "serrinlab/error.hpp"
#include "serrinlab/identity.hpp"
#include "serrinlab/probe.hpp"

namespace serrinlab {

// Locale-independent numeric formatting for reports.
inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// temp + rename, so readers never see a partial file
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw Error("IoError", "cannot open " + tmp.string());
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string identity_csv(const std::vector<IdentityReport>& reports) {
    std::string out = "level,h,lhs,rhs_Rstar,deficit,closure,gauge_spread,ref_radius\n";
    for (const auto& r : reports) {
        out += std::to_string(r.mesh_level) + "," + fmt_num(r.h) + "," + fmt_num(r.lhs) + "," +
               fmt_num(r.rhs_at_r.front().second) + "," + fmt_num(r.deficit) + "," +
               fmt_num(r.closure) + "," + fmt_num(r.gauge_spread) + "," +
               fmt_num(r.reference_radius) + "\n";
    }
    return out;
}

inline std::string probe_csv(const std::vector<ProbeRecord>& records) {
    std::string out = "eps,level,h,defect,mean_fnu,lhs,max_f,theta1,theta2\n";
    for (const auto& r : records) {
        out += fmt_num(r.eps) + "," + std::to_string(r.mesh_level) + "," + fmt_num(r.h) + "," +
               fmt_num(r.defect) + "," + fmt_num(r.mean_fnu) + "," + fmt_num(r.lhs) + "," +
               fmt_num(r.max_f) + "," + fmt_num(r.theta_corners[0]) + "," +
               fmt_num(r.theta_corners[1]) + "\n";
    }
    return out;
}

struct ConvergenceRow {
    int level;
    double h;
    ErrorNorms norms;
};

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::string out = "level,h,l2_rel,h1_rel,linf,l2_order\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        std::string order;
        if (i > 0)
            order = fmt_num(std::log(rows[i - 1].norms.l2_rel / rows[i].norms.l2_rel) /
                            std::log(rows[i - 1].h / rows[i].h));
        out += std::to_string(rows[i].level) + "," + fmt_num(rows[i].h) + "," +
               fmt_num(rows[i].norms.l2_rel) + "," + fmt_num(rows[i].norms.h1_rel) + "," +
               fmt_num(rows[i].norms.linf) + "," + order + "\n";
    }
    return out;
}

}  // namespace serrinlab
