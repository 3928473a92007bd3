#pragma once

#include "exflow/curve.hpp"
#include "exflow/support_surface.hpp"

#include <vector>

namespace exflow {

// Extrinsic ball curvature k(x, y) = 2 <x - y, nu(x)> / |x - y|^2: the
// curvature of the unique extrinsic ball touching at x (outward normal nu)
// and passing through y.
double ball_curvature(Vec2 x, Vec2 nu, Vec2 y);
double ball_curvature(Vec3 x, Vec3 nu, Vec3 y);

// Per-vertex extremes of k(x, .) over the sampled partners, merged with the
// diagonal limit values kappa_1 / kappa_n so that the ordering
// k_ex <= kappa_1 <= kappa_n <= k_in always holds.
struct BallCurvatureField {
    std::vector<double> k_ex;  // exscribed: inf of k(x, .)
    std::vector<double> k_in;  // inscribed: sup of k(x, .)
    std::vector<int> argmin;   // partner attaining the pre-merge extremum
    std::vector<int> argmax;
    std::vector<char> ex_boundary_attained; // extremum realized by the diagonal limit
    std::vector<char> in_boundary_attained;

    double min_k_ex() const;
    double max_k_in() const;
};

// Partner pairs within this hop distance count as the diagonal limit when
// classifying interior vs boundary attainment.
inline constexpr int kBoundaryNeighborhood = 3;

BallCurvatureField ball_field(const DiscreteCurve& curve);

// Surfaces scan grid nodes as partners; stride subsamples the partner set
// (the merge with kappa keeps the ordering exact either way).
BallCurvatureField ball_field(const SurfaceGeometry& geom, int partner_stride = 1);

struct TouchingBallReport {
    double curvature = 0.0;        // k_ex(x) used for the construction
    bool half_space = false;       // |k| below the degeneracy threshold
    double violation_depth = 0.0;  // worst signed penetration; <= 0 means containment holds
    int worst_vertex = -1;
};

// Builds the exscribed extrinsic ball at vertex x (ball, half-space, or
// complement of a ball depending on the sign of k_ex) and scans all vertices
// for containment of the enclosed region.
TouchingBallReport touching_ball_check(const DiscreteCurve& curve, const BallCurvatureField& field,
                                       int x_index);

// First-variation residuals of k on an analytic curve: analytic formulas
//   d_x k = -(2/d)(k - kappa_x) <w, T_x>
//   d_y k = -(2/d^2) <T_y, nu_x - k d w>
// against central finite differences in arclength.
struct FirstVariationResidual {
    double x_residual;
    double y_residual;
    double x_scale; // magnitude of the analytic derivative, for relative error
    double y_scale;
};

FirstVariationResidual verify_first_variation(const AnalyticCurve& curve, double theta_x,
                                              double theta_y, double fd_step = 1e-5);

// || nu_y - (nu_x - k d w) || at the discrete argmin partner of vertex x.
// Returns < 0 when the extremum is boundary-attained (identity not applicable).
double verify_reflection_identity(const DiscreteCurve& curve, const BallCurvatureField& field,
                                  int x_index);

} // namespace exflow
