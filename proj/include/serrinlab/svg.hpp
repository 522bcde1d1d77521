#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "serrinlab/fem.hpp"
#include "serrinlab/report.hpp"

namespace serrinlab {

namespace svg_detail {

inline std::string header(double x0, double y0, double w, double h) {
    // viewBox in domain coordinates; y flipped so +x_2 points up
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"" +
           fmt_num(x0) + " " + fmt_num(-y0 - h) + " " + fmt_num(w) + " " + fmt_num(h) + "\">\n";
}

inline std::string color(double t) {
    // linear blue -> red
    t = std::clamp(t, 0.0, 1.0);
    const int r = int(std::lround(255.0 * t));
    const int b = int(std::lround(255.0 * (1.0 - t)));
    const int g = int(std::lround(80.0 * (1.0 - std::abs(2.0 * t - 1.0))));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace svg_detail

// Flat per-triangle rendering of a nodal scalar field with a fixed 10-step legend.
inline std::string svg_scalar_field(const P2Space& space, const Eigen::VectorXd& dofs) {
    const Mesh& mesh = *space.mesh;
    double vmin = dofs.head(space.n_vertices).minCoeff();
    double vmax = dofs.head(space.n_vertices).maxCoeff();
    if (vmax - vmin < 1e-300) vmax = vmin + 1.0;

    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& v : mesh.vertices) {
        x0 = std::min(x0, v[0]);
        x1 = std::max(x1, v[0]);
        y0 = std::min(y0, v[1]);
        y1 = std::max(y1, v[1]);
    }
    const double pad = 0.35 * (x1 - x0) + 1e-6;
    std::string out = svg_detail::header(x0 - 0.05 * (x1 - x0), y0 - 0.05 * (y1 - y0),
                                         (x1 - x0) * 1.1 + pad, (y1 - y0) * 1.1);
    const int steps = 10;
    for (const auto& t : mesh.triangles) {
        double mean = (dofs[t[0]] + dofs[t[1]] + dofs[t[2]]) / 3.0;
        double u = (mean - vmin) / (vmax - vmin);
        u = (std::floor(u * steps) + 0.5) / steps;  // quantized to the legend steps
        out += "<polygon points=\"";
        for (int k = 0; k < 3; ++k) {
            const Vec2& p = mesh.vertices[t[k]];
            out += fmt_num(p[0]) + "," + fmt_num(-p[1]) + " ";
        }
        out += "\" fill=\"" + svg_detail::color(u) + "\" stroke=\"none\"/>\n";
    }
    // legend
    const double lx = x1 + 0.1 * (x1 - x0);
    const double lh = (y1 - y0) / steps;
    for (int i = 0; i < steps; ++i) {
        const double u = (i + 0.5) / steps;
        const double ly = y0 + i * lh;
        out += "<rect x=\"" + fmt_num(lx) + "\" y=\"" + fmt_num(-(ly + lh)) + "\" width=\"" +
               fmt_num(0.08 * (x1 - x0)) + "\" height=\"" + fmt_num(lh) + "\" fill=\"" +
               svg_detail::color(u) + "\"/>\n";
        out += "<text x=\"" + fmt_num(lx + 0.1 * (x1 - x0)) + "\" y=\"" + fmt_num(-ly) +
               "\" font-size=\"" + fmt_num(0.05 * (y1 - y0)) + "\">" +
               fmt_num(vmin + (vmax - vmin) * i / steps) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

inline std::string svg_mesh(const Mesh& mesh) {
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& v : mesh.vertices) {
        x0 = std::min(x0, v[0]);
        x1 = std::max(x1, v[0]);
        y0 = std::min(y0, v[1]);
        y1 = std::max(y1, v[1]);
    }
    std::string out = svg_detail::header(x0 - 0.05, y0 - 0.05, (x1 - x0) + 0.1, (y1 - y0) + 0.1);
    const double sw = 0.002 * std::max(x1 - x0, y1 - y0);
    for (const auto& t : mesh.triangles) {
        out += "<polygon points=\"";
        for (int k = 0; k < 3; ++k)
            out += fmt_num(mesh.vertices[t[k]][0]) + "," + fmt_num(-mesh.vertices[t[k]][1]) + " ";
        out += "\" fill=\"none\" stroke=\"#444\" stroke-width=\"" + fmt_num(sw) + "\"/>\n";
    }
    for (const auto& e : mesh.boundary_edges) {
        const char* col = (e.tag == EdgeTag::Sigma) ? "#c00" : "#06c";
        out += "<line x1=\"" + fmt_num(mesh.vertices[e.a][0]) + "\" y1=\"" +
               fmt_num(-mesh.vertices[e.a][1]) + "\" x2=\"" + fmt_num(mesh.vertices[e.b][0]) +
               "\" y2=\"" + fmt_num(-mesh.vertices[e.b][1]) + "\" stroke=\"" + col +
               "\" stroke-width=\"" + fmt_num(2.0 * sw) + "\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

// f_nu against the Sigma curve parameter for one probe record.
inline std::string svg_profile(const std::vector<SigmaSample>& samples) {
    double ymin = 1e300, ymax = -1e300;
    for (const auto& s : samples) {
        ymin = std::min(ymin, s.f_nu);
        ymax = std::max(ymax, s.f_nu);
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 1e-3;
        ymax += 1e-3;
    }
    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
        "viewBox=\"0 0 640 400\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"#fff\" stroke=\"#000\"/>\n";
    out += "<polyline fill=\"none\" stroke=\"#c00\" stroke-width=\"1.5\" points=\"";
    for (const auto& s : samples) {
        const double px = 40.0 + 560.0 * s.s;
        const double py = 360.0 - 320.0 * (s.f_nu - ymin) / (ymax - ymin);
        out += fmt_num(px) + "," + fmt_num(py) + " ";
    }
    out += "\"/>\n";
    out += "<text x=\"10\" y=\"20\" font-size=\"14\">f_nu on Sigma, range [" + fmt_num(ymin) +
           ", " + fmt_num(ymax) + "]</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace serrinlab
