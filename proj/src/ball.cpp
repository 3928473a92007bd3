#include "exflow/ball.hpp"

#include "exflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace exflow {

double ball_curvature(Vec2 x, Vec2 nu, Vec2 y) {
    Vec2 d = x - y;
    double d2 = d.dot(d);
    if (d2 == 0.0) throw geometry_error("ball_curvature: coincident points");
    return 2.0 * d.dot(nu) / d2;
}

double ball_curvature(Vec3 x, Vec3 nu, Vec3 y) {
    Vec3 d = x - y;
    double d2 = d.dot(d);
    if (d2 == 0.0) throw geometry_error("ball_curvature: coincident points");
    return 2.0 * d.dot(nu) / d2;
}

double BallCurvatureField::min_k_ex() const {
    return *std::min_element(k_ex.begin(), k_ex.end());
}

double BallCurvatureField::max_k_in() const {
    return *std::max_element(k_in.begin(), k_in.end());
}

BallCurvatureField ball_field(const DiscreteCurve& curve) {
    const int n = curve.size();
    BallCurvatureField f;
    f.k_ex.resize(n);
    f.k_in.resize(n);
    f.argmin.assign(n, -1);
    f.argmax.assign(n, -1);
    f.ex_boundary_attained.resize(n);
    f.in_boundary_attained.resize(n);

    std::vector<Vec2> nu(n);
    std::vector<double> kap(n);
    for (int i = 0; i < n; ++i) {
        nu[i] = curve.normal(i);
        kap[i] = curve.curvature(i);
    }

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t xi) {
        const int x = static_cast<int>(xi);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        int alo = -1, ahi = -1;
        Vec2 px = curve.point(x);
        for (int y = 0; y < n; ++y) {
            if (y == x) continue;
            double k = ball_curvature(px, nu[x], curve.point(y));
            if (k < lo) {
                lo = k;
                alo = y;
            }
            if (k > hi) {
                hi = k;
                ahi = y;
            }
        }
        // merge with the diagonal limit (kappa_1 = kappa_n = kappa for curves)
        bool ex_boundary = kap[x] <= lo;
        bool in_boundary = kap[x] >= hi;
        int hop_lo = std::min(std::abs(alo - x), n - std::abs(alo - x));
        int hop_hi = std::min(std::abs(ahi - x), n - std::abs(ahi - x));
        if (hop_lo <= kBoundaryNeighborhood) ex_boundary = true;
        if (hop_hi <= kBoundaryNeighborhood) in_boundary = true;
        f.k_ex[xi] = std::min(lo, kap[x]);
        f.k_in[xi] = std::max(hi, kap[x]);
        f.argmin[xi] = alo;
        f.argmax[xi] = ahi;
        f.ex_boundary_attained[xi] = ex_boundary ? 1 : 0;
        f.in_boundary_attained[xi] = in_boundary ? 1 : 0;
    });
    return f;
}

BallCurvatureField ball_field(const SurfaceGeometry& geom, int partner_stride) {
    const int n = geom.n_lat * geom.n_lon;
    const int stride = std::max(1, partner_stride);
    BallCurvatureField f;
    f.k_ex.resize(n);
    f.k_in.resize(n);
    f.argmin.assign(n, -1);
    f.argmax.assign(n, -1);
    f.ex_boundary_attained.resize(n);
    f.in_boundary_attained.resize(n);

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t xi) {
        const int x = static_cast<int>(xi);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        int alo = -1, ahi = -1;
        Vec3 px = geom.position[xi];
        Vec3 nx = geom.normal[xi];
        for (int y = 0; y < n; y += stride) {
            if (y == x) continue;
            Vec3 d = px - geom.position[y];
            double d2 = d.dot(d);
            if (d2 < 1e-24) continue;
            double k = 2.0 * d.dot(nx) / d2;
            if (k < lo) {
                lo = k;
                alo = y;
            }
            if (k > hi) {
                hi = k;
                ahi = y;
            }
        }
        double k1 = geom.kappa1[xi], k2 = geom.kappa2[xi];
        f.ex_boundary_attained[xi] = k1 <= lo ? 1 : 0;
        f.in_boundary_attained[xi] = k2 >= hi ? 1 : 0;
        f.k_ex[xi] = std::min(lo, k1);
        f.k_in[xi] = std::max(hi, k2);
        f.argmin[xi] = alo;
        f.argmax[xi] = ahi;
    });
    return f;
}

TouchingBallReport touching_ball_check(const DiscreteCurve& curve, const BallCurvatureField& field,
                                       int x_index) {
    const int n = curve.size();
    TouchingBallReport rep;
    rep.curvature = field.k_ex[x_index];
    const double diameter = curve.diameter();
    const double eps0 = 1e-9 / diameter;

    Vec2 x = curve.point(x_index);
    Vec2 nu = curve.normal(x_index);
    rep.violation_depth = -std::numeric_limits<double>::infinity();

    if (std::abs(rep.curvature) <= eps0) {
        // half-space through x: the region lies on the inner side of nu
        rep.half_space = true;
        for (int i = 0; i < n; ++i) {
            double depth = (curve.point(i) - x).dot(nu);
            if (depth > rep.violation_depth) {
                rep.violation_depth = depth;
                rep.worst_vertex = i;
            }
        }
        return rep;
    }

    double radius = 1.0 / std::abs(rep.curvature);
    Vec2 center = x - nu * (1.0 / rep.curvature);
    for (int i = 0; i < n; ++i) {
        double dist = (curve.point(i) - center).norm();
        // ball case: vertices must stay inside; complement case: outside
        double depth = rep.curvature > 0.0 ? dist - radius : radius - dist;
        if (depth > rep.violation_depth) {
            rep.violation_depth = depth;
            rep.worst_vertex = i;
        }
    }
    return rep;
}

FirstVariationResidual verify_first_variation(const AnalyticCurve& curve, double theta_x,
                                              double theta_y, double fd_step) {
    auto k_of = [&](double tx, double ty) {
        return ball_curvature(curve.position(tx), curve.outward_normal(tx), curve.position(ty));
    };

    Vec2 X = curve.position(theta_x);
    Vec2 Y = curve.position(theta_y);
    Vec2 nux = curve.outward_normal(theta_x);
    Vec2 Tx = curve.unit_tangent(theta_x);
    Vec2 Ty = curve.unit_tangent(theta_y);
    double d = (X - Y).norm();
    if (d == 0.0) throw geometry_error("verify_first_variation: coincident points");
    Vec2 w = (X - Y) * (1.0 / d);
    double k = ball_curvature(X, nux, Y);
    double kap_x = curve.curvature(theta_x);

    double dx_analytic = -(2.0 / d) * (k - kap_x) * w.dot(Tx);
    Vec2 refl = nux - w * (k * d);
    double dy_analytic = -(2.0 / (d * d)) * Ty.dot(refl);

    // finite differences in the parameter, converted to arclength derivatives
    double hx = fd_step;
    double dx_fd = (k_of(theta_x + hx, theta_y) - k_of(theta_x - hx, theta_y)) / (2.0 * hx) /
                   curve.speed(theta_x);
    double dy_fd = (k_of(theta_x, theta_y + hx) - k_of(theta_x, theta_y - hx)) / (2.0 * hx) /
                   curve.speed(theta_y);

    FirstVariationResidual r;
    r.x_residual = std::abs(dx_fd - dx_analytic);
    r.y_residual = std::abs(dy_fd - dy_analytic);
    r.x_scale = std::max(std::abs(dx_analytic), 1.0);
    r.y_scale = std::max(std::abs(dy_analytic), 1.0);
    return r;
}

double verify_reflection_identity(const DiscreteCurve& curve, const BallCurvatureField& field,
                                  int x_index) {
    if (field.ex_boundary_attained[x_index]) return -1.0;
    int y_index = field.argmin[x_index];
    Vec2 X = curve.point(x_index);
    Vec2 Y = curve.point(y_index);
    Vec2 nux = curve.normal(x_index);
    Vec2 nuy = curve.normal(y_index);
    double d = (X - Y).norm();
    Vec2 w = (X - Y) * (1.0 / d);
    double k = ball_curvature(X, nux, Y);
    Vec2 predicted = nux - w * (k * d);
    return (nuy - predicted).norm();
}

} // namespace exflow
