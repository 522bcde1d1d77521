#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "serrinlab/boundary.hpp"
#include "serrinlab/error.hpp"

namespace serrinlab {

enum class EdgeTag { Sigma, T };

struct BoundaryEdge {
    int a, b;       // vertex indices, in traversal order of the curve
    EdgeTag tag;
    double s0, s1;  // exact-curve parameter interval
    Vec2 mid;       // exact-curve point at (s0+s1)/2, for isoparametric quadratics
};

// Transfinite triangulation of a lens domain.  Grid vertices are
//   v(i,j) = (1-t_j)*sigma(s_i) + t_j*t_arc(s_i),   s_i = i/n_s, t_j = j/n_t,
// with the degenerate end columns collapsed to the two corners and emitted
// as triangle fans.
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;   // Sigma chain then T chain, in order
    int n_s = 0, n_t = 0;
    const DomainBoundary* source = nullptr;

    int corner_index(int i) const {
        const int base = (n_s - 1) * (n_t + 1);
        return base + i;
    }

    double max_diameter() const {
        double h = 0.0;
        for (const auto& t : triangles)
            for (int e = 0; e < 3; ++e)
                h = std::max(h, (vertices[t[e]] - vertices[t[(e + 1) % 3]]).norm());
        return h;
    }

    std::set<std::pair<int, int>> edge_set() const {
        std::set<std::pair<int, int>> edges;
        for (const auto& t : triangles)
            for (int e = 0; e < 3; ++e) {
                int a = t[e], b = t[(e + 1) % 3];
                edges.insert({std::min(a, b), std::max(a, b)});
            }
        return edges;
    }
};

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0]);
}

inline Mesh generate(const DomainBoundary& bdry, int n_s, int n_t) {
    if (n_s < 4 || n_t < 2) throw Error("BadResolution", "need n_s >= 4 and n_t >= 2");
    Mesh mesh;
    mesh.n_s = n_s;
    mesh.n_t = n_t;
    mesh.source = &bdry;

    // interior columns i = 1..n_s-1, rows j = 0..n_t; then the two corners
    auto vid = [&](int i, int j) { return (i - 1) * (n_t + 1) + j; };
    for (int i = 1; i < n_s; ++i) {
        const double s = double(i) / n_s;
        const Vec2 bottom = bdry.sigma(s);
        const Vec2 top = bdry.t_arc(s);
        for (int j = 0; j <= n_t; ++j) {
            const double t = double(j) / n_t;
            mesh.vertices.push_back((1.0 - t) * bottom + t * top);
        }
    }
    const int c1 = int(mesh.vertices.size());
    mesh.vertices.push_back(bdry.corner(0));
    const int c2 = int(mesh.vertices.size());
    mesh.vertices.push_back(bdry.corner(1));

    auto push_tri = [&](int a, int b, int c, int i, int j) {
        if (signed_area(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]) <= 0.0)
            throw Error("InvertedElement", "non-positive element at (i=" + std::to_string(i) +
                                               ", j=" + std::to_string(j) + ")");
        mesh.triangles.push_back({a, b, c});
    };

    // fan at corner p1 (between column 0 and column 1)
    for (int j = 0; j < n_t; ++j) push_tri(c1, vid(1, j), vid(1, j + 1), 0, j);
    // interior quads, split along the shorter diagonal
    for (int i = 1; i < n_s - 1; ++i) {
        for (int j = 0; j < n_t; ++j) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            const double diag_ac = (mesh.vertices[a] - mesh.vertices[c]).norm();
            const double diag_bd = (mesh.vertices[b] - mesh.vertices[d]).norm();
            if (diag_ac <= diag_bd) {
                push_tri(a, b, c, i, j);
                push_tri(a, c, d, i, j);
            } else {
                push_tri(a, b, d, i, j);
                push_tri(b, c, d, i, j);
            }
        }
    }
    // fan at corner p2
    for (int j = 0; j < n_t; ++j) push_tri(c2, vid(n_s - 1, j + 1), vid(n_s - 1, j), n_s - 1, j);

    auto push_edge = [&](int a, int b, EdgeTag tag, double s0, double s1) {
        const Vec2 mid = (tag == EdgeTag::Sigma) ? bdry.sigma(0.5 * (s0 + s1))
                                                 : bdry.t_arc(0.5 * (s0 + s1));
        mesh.boundary_edges.push_back({a, b, tag, s0, s1, mid});
    };
    for (int i = 0; i < n_s; ++i) {
        const int a = (i == 0) ? c1 : vid(i, 0);
        const int b = (i == n_s - 1) ? c2 : vid(i + 1, 0);
        push_edge(a, b, EdgeTag::Sigma, double(i) / n_s, double(i + 1) / n_s);
    }
    for (int i = 0; i < n_s; ++i) {
        const int a = (i == 0) ? c1 : vid(i, n_t);
        const int b = (i == n_s - 1) ? c2 : vid(i + 1, n_t);
        push_edge(a, b, EdgeTag::T, double(i) / n_s, double(i + 1) / n_s);
    }
    return mesh;
}

// Refinement regenerates at doubled resolution from the stored boundary, so
// boundary vertices re-snap to the exact curves.
inline Mesh refine(const Mesh& mesh) {
    if (!mesh.source) throw Error("MeshInvalid", "mesh has no boundary source to refine from");
    return generate(*mesh.source, 2 * mesh.n_s, 2 * mesh.n_t);
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string write_mesh_text(const Mesh& mesh) {
    std::ostringstream os;
    os << "lensmesh 1\n";
    os << mesh.vertices.size() << "\n";
    for (const auto& v : mesh.vertices)
        os << format_double(v[0]) << " " << format_double(v[1]) << "\n";
    os << mesh.triangles.size() << "\n";
    for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << mesh.boundary_edges.size() << "\n";
    for (const auto& e : mesh.boundary_edges)
        os << e.a << " " << e.b << " " << (e.tag == EdgeTag::Sigma ? "SIGMA" : "T") << " "
           << format_double(e.s0) << " " << format_double(e.s1) << " " << format_double(e.mid[0])
           << " " << format_double(e.mid[1]) << "\n";
    return os.str();
}

inline Mesh read_mesh_text(std::istream& is) {
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != "lensmesh" || version != 1)
        throw Error("BadMeshFormat", "expected 'lensmesh 1' header");
    Mesh mesh;
    size_t nv = 0, nt = 0, ne = 0;
    is >> nv;
    mesh.vertices.resize(nv);
    for (auto& v : mesh.vertices) is >> v[0] >> v[1];
    is >> nt;
    mesh.triangles.resize(nt);
    for (auto& t : mesh.triangles) is >> t[0] >> t[1] >> t[2];
    is >> ne;
    mesh.boundary_edges.resize(ne);
    for (auto& e : mesh.boundary_edges) {
        std::string tag;
        is >> e.a >> e.b >> tag >> e.s0 >> e.s1 >> e.mid[0] >> e.mid[1];
        if (tag == "SIGMA")
            e.tag = EdgeTag::Sigma;
        else if (tag == "T")
            e.tag = EdgeTag::T;
        else
            throw Error("BadMeshFormat", "unknown edge tag " + tag);
    }
    if (!is) throw Error("BadMeshFormat", "truncated mesh file");
    return mesh;
}

inline Mesh read_mesh_text(const std::string& text) {
    std::istringstream is(text);
    return read_mesh_text(is);
}

}  // namespace serrinlab
