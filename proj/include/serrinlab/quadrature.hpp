#pragma once

#include <array>

namespace serrinlab {

// Degree-5 7-point rule on the reference triangle (barycentric coordinates,
// weights sum to 1; integral = 0.5 * |det J| * sum w_q g_q).
struct TriQuadPoint {
    double l0, l1, l2, w;
};

inline const std::array<TriQuadPoint, 7>& tri_quad_deg5() {
    static const double a1 = 0.059715871789770, b1 = 0.470142064105115;
    static const double a2 = 0.797426985353087, b2 = 0.101286507323456;
    static const double w0 = 0.225;
    static const double w1 = 0.132394152788506;
    static const double w2 = 0.125939180544827;
    static const std::array<TriQuadPoint, 7> rule = {{
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, w0},
        {a1, b1, b1, w1},
        {b1, a1, b1, w1},
        {b1, b1, a1, w1},
        {a2, b2, b2, w2},
        {b2, a2, b2, w2},
        {b2, b2, a2, w2},
    }};
    return rule;
}

// 5-point Gauss-Legendre on [0,1].
struct LineQuadPoint {
    double x, w;
};

inline const std::array<LineQuadPoint, 5>& line_quad_5() {
    static const double x1 = 0.5384693101056831, x2 = 0.9061798459386640;
    static const double w0 = 0.5688888888888889, w1 = 0.4786286704993665,
                        w2 = 0.2369268850561891;
    static const std::array<LineQuadPoint, 5> rule = {{
        {0.5 * (1.0 - x2), 0.5 * w2},
        {0.5 * (1.0 - x1), 0.5 * w1},
        {0.5, 0.5 * w0},
        {0.5 * (1.0 + x1), 0.5 * w1},
        {0.5 * (1.0 + x2), 0.5 * w2},
    }};
    return rule;
}

}  // namespace serrinlab
