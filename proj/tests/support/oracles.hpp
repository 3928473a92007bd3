// Test-side oracles: finite differences and brute-force searches, independent
// of the closed-form implementation paths they cross-check.
#pragma once

#include "exflow/linalg.hpp"
#include "exflow/speed.hpp"
#include "exflow/structure_lab.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// central first difference of a scalar function of one coordinate
inline double fd_partial(const std::function<double(std::span<const double>)>& f,
                         std::vector<double> x, int i, double h) {
    x[i] += h;
    double up = f(x);
    x[i] -= 2.0 * h;
    double dn = f(x);
    return (up - dn) / (2.0 * h);
}

// central second difference d^2 f / dx_i dx_j
inline double fd_second(const std::function<double(std::span<const double>)>& f,
                        std::vector<double> x, int i, int j, double h) {
    if (i == j) {
        double mid = f(x);
        x[i] += h;
        double up = f(x);
        x[i] -= 2.0 * h;
        double dn = f(x);
        return (up - 2.0 * mid + dn) / (h * h);
    }
    x[i] += h;
    x[j] += h;
    double pp = f(x);
    x[j] -= 2.0 * h;
    double pm = f(x);
    x[i] -= 2.0 * h;
    double mm = f(x);
    x[j] += 2.0 * h;
    double mp = f(x);
    return (pp - pm - mp + mm) / (4.0 * h * h);
}

// directional derivative d/ds F(A + s B) at s = 0 by central differences
inline double fd_matrix_directional(const exflow::SpeedFunction& f, const exflow::SymMatrix& a,
                                    const exflow::SymMatrix& b, double s) {
    exflow::SymMatrix up = a, dn = a;
    up += s * b;
    dn -= s * b;
    return (f.matrix_value(up) - f.matrix_value(dn)) / (2.0 * s);
}

// second directional derivative d^2/ds^2 F(A + s B) at s = 0
inline double fd_matrix_second(const exflow::SpeedFunction& f, const exflow::SymMatrix& a,
                               const exflow::SymMatrix& b, double s) {
    exflow::SymMatrix up = a, dn = a;
    up += s * b;
    dn -= s * b;
    return (f.matrix_value(up) - 2.0 * f.matrix_value(a) + f.matrix_value(dn)) / (s * s);
}

// Exhaustive grid maximization of the interior bracket over Lambda for n = 2:
// pts^4 grid centered on `center` with the given half-span per entry. The
// quadratic dF : [-X + Lambda X + X Lambda^T - Lambda Y Lambda^T] is written
// out here independently of the library's closed-form route.
inline double interior_bracket_grid_max(const exflow::SpeedFunction& f, const exflow::SymMatrix& a,
                                        const exflow::SymMatrix& b, double k,
                                        std::span<const double> center, double half_span,
                                        int pts) {
    exflow::SymMatrix df = f.matrix_gradient(a);
    exflow::SymMatrix x = a.shifted(-k);
    exflow::SymMatrix y = b.shifted(-k);
    const double base = -df.dot(x);
    // linear coefficients: 2 (dF X)_{ip}
    double lin[2][2];
    for (int i = 0; i < 2; ++i)
        for (int p = 0; p < 2; ++p)
            lin[i][p] = 2.0 * (df(i, 0) * x(p, 0) + df(i, 1) * x(p, 1));

    auto objective = [&](double l00, double l01, double l10, double l11) {
        double v = base + lin[0][0] * l00 + lin[0][1] * l01 + lin[1][0] * l10 + lin[1][1] * l11;
        // (Lambda Y Lambda^T)_{ij} contracted with dF
        double yl00 = y(0, 0) * l00 + y(0, 1) * l01; // (Y Lambda^T)_{0,0}
        double yl01 = y(0, 0) * l10 + y(0, 1) * l11;
        double yl10 = y(1, 0) * l00 + y(1, 1) * l01;
        double yl11 = y(1, 0) * l10 + y(1, 1) * l11;
        double q00 = l00 * yl00 + l01 * yl10;
        double q01 = l00 * yl01 + l01 * yl11;
        double q10 = l10 * yl00 + l11 * yl10;
        double q11 = l10 * yl01 + l11 * yl11;
        v -= df(0, 0) * q00 + df(0, 1) * (q01 + q10) + df(1, 1) * q11;
        return v;
    };

    double best = -std::numeric_limits<double>::infinity();
    auto coord = [&](int c, int i) { return center[c] + half_span * (2.0 * i / (pts - 1) - 1.0); };
    for (int i0 = 0; i0 < pts; ++i0)
        for (int i1 = 0; i1 < pts; ++i1)
            for (int i2 = 0; i2 < pts; ++i2)
                for (int i3 = 0; i3 < pts; ++i3)
                    best = std::max(best,
                                    objective(coord(0, i0), coord(1, i1), coord(2, i2),
                                              coord(3, i3)));
    return best;
}

} // namespace oracles
