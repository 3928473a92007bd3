#pragma once

#include "exflow/linalg.hpp"
#include "exflow/modulator.hpp"
#include "exflow/speed.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace exflow {

// Sample attaining the worst slack of a randomized check. Only the fields
// relevant to the particular check are filled.
struct WitnessSample {
    std::uint64_t trial = 0;
    std::vector<double> lambda;
    std::vector<double> matrix_a; // row-major
    std::vector<double> matrix_b; // row-major
    double k = std::numeric_limits<double>::quiet_NaN();
    double scalar_a = std::numeric_limits<double>::quiet_NaN();
    double scalar_b = std::numeric_limits<double>::quiet_NaN();
};

struct InequalityReport {
    std::string check;
    long trials = 0;
    long skipped = 0;
    double tol = 1e-10;
    double min_slack = std::numeric_limits<double>::infinity();
    bool pass = false;
    WitnessSample witness;
    std::vector<std::pair<std::string, double>> extras;

    void finish() { pass = min_slack >= -tol; }
};

// --- classifiers -----------------------------------------------------------

// Convexity of f probed by the sign of the second-derivative quadratic form
// on random (A, B) pairs, plus the support-function consequence
// dF(A) : B <= F(B) of convexity with 1-homogeneity.
InequalityReport check_convexity(const SpeedFunction& f, long trials, std::uint64_t seed,
                                 double tol = 1e-10);

// Inverse-concavity via the general pointwise criterion: the matrix
//   f''_ij - (2/f) f'_i f'_j + 2 (f'_i / lambda_i) delta_ij
// nonnegative definite together with the pairwise quantity
//   (f'_i - f'_j)/(lambda_i - lambda_j) + f'_i/lambda_j + f'_j/lambda_i >= 0.
InequalityReport check_inverse_concave_general(const SpeedFunction& f, long trials,
                                               std::uint64_t seed, double tol = 1e-10);

// Same, via the reduced criterion for 1-homogeneous f (matrix without the
// rank-one correction). Also cross-checks per-sample agreement with the
// general criterion and counts disagreements in extras.
InequalityReport check_inverse_concave_homog(const SpeedFunction& f, long trials,
                                             std::uint64_t seed, double tol = 1e-10);

// --- scalar inequalities ----------------------------------------------------

// psi(b) - psi(a) + psi'(a)(a - b); nonnegative when psi is convex
double scalar_psi_convex_slack(const Modulator& m, double a, double b);

// psi(b) - psi(a) - psi'(a) a^2 (1/a - 1/b); nonnegative under condition (iv)
double scalar_psi_iv_slack(const Modulator& m, double a, double b);

InequalityReport verify_scalar_psi_convex(const Modulator& m, long trials, std::uint64_t seed,
                                          double tol = 1e-12);
InequalityReport verify_scalar_psi_iv(const Modulator& m, long trials, std::uint64_t seed,
                                      double tol = 1e-12);

// --- interior inequality ----------------------------------------------------

// Value of the Lambda-dependent quadratic
//   dF(A) : [ -(A - kI) + Lambda (A-kI) + (A-kI) Lambda^T - Lambda (B-kI) Lambda^T ]
// whose supremum over Lambda is attained at Lambda = (A-kI)(B-kI)^{-1}.
double interior_bracket(const SpeedFunction& f, const SymMatrix& a, const SymMatrix& b, double k,
                        std::span<const double> lambda_rowmajor);

std::vector<double> interior_optimal_lambda(const SymMatrix& a, const SymMatrix& b, double k);

// psi(F(B)) - psi(F(A)) - psi'(F(A)) dF(A) : [X - X Y^{-1} X], X = A-kI, Y = B-kI.
// Preconditions (k > 0, spectra above k) are hard errors.
double interior_inequality_slack(const SpeedFunction& f, const Modulator& m, const SymMatrix& a,
                                 const SymMatrix& b, double k);

InequalityReport verify_interior_inequality(const SpeedFunction& f, const Modulator& m,
                                            long trials, std::uint64_t seed, double tol = 1e-10);

// q(z) for z in [0, k]; by construction q(k) equals the interior slack
double interior_q(const SpeedFunction& f, const Modulator& m, const SymMatrix& a,
                  const SymMatrix& b, double k, double z);

// true iff q is non-decreasing on the grid within tol
bool verify_q_monotone(const SpeedFunction& f, const Modulator& m, const SymMatrix& a,
                       const SymMatrix& b, double k, const std::vector<double>& z_grid,
                       double tol = 1e-10);

InequalityReport verify_q_monotone_sampled(const SpeedFunction& f, const Modulator& m, long trials,
                                           std::uint64_t seed, int grid_points = 101,
                                           double tol = 1e-10);

// --- boundary quadratic form -------------------------------------------------

// Q evaluated with the optimal multiplier Lambda_i^p = B_ip / (lambda_p - lambda_1):
//   sum f''_pq B_pp B_qq + sum_{p != q} (f'_p - f'_q)/(lambda_p - lambda_q) B_pq^2
//   + (psi''/psi')(F) (sum f'_p B_pp)^2 + 2 sum_p sum_{q >= 2} f'_p/(lambda_q - lambda_1) B_pq^2
// Requires lambda strictly increasing and B_11 = 0.
double boundary_form_value(const SpeedFunction& f, const Modulator& m, const EigenTuple& lam,
                           const SymMatrix& b);

// The Lambda-dependent part of Q (first column of Lambda constrained to zero),
// used to cross-check optimality of the closed-form multiplier.
double boundary_lambda_objective(const SpeedFunction& f, const EigenTuple& lam, const SymMatrix& b,
                                 std::span<const double> lambda_rowmajor);

std::vector<double> boundary_optimal_lambda(const EigenTuple& lam, const SymMatrix& b);

InequalityReport verify_boundary_form(const SpeedFunction& f, const Modulator& m, long trials,
                                      std::uint64_t seed, double tol = 1e-10);

// --- pinching constant -------------------------------------------------------

struct PinchingEstimate {
    bool feasible = false;
    long feasible_count = 0;
    long samples = 0;
    double ratio_sup = 1.0;             // sampled lower bound for C'
    double boundary_min_fstar = std::numeric_limits<double>::infinity();
    bool dual_decays_on_boundary = false;
};

PinchingEstimate estimate_pinching_constant(const SpeedFunction& f, double C, long samples,
                                            std::uint64_t seed);

// --- admissibility (sampled verification of the structural conditions) -------

struct AdmissibilityReport {
    long trials = 0;
    double symmetry_max_dev = 0.0;
    double homogeneity_max_rel = 0.0;
    double gradient_min = std::numeric_limits<double>::infinity();
    double value_min = std::numeric_limits<double>::infinity();
    double euler_max_rel = 0.0;
    bool pass = false;
};

AdmissibilityReport verify_admissibility(const SpeedFunction& f, long trials, std::uint64_t seed);

struct DualReport {
    long trials = 0;
    double identity_max_residual = 0.0;  // |f*(mu) f(1/mu) - 1|
    double involution_max_rel = 0.0;     // |f**(lam) - f(lam)| / f(lam)
    bool pass = false;
};

DualReport verify_dual(const SpeedFunction& f, long trials, std::uint64_t seed);

// --- shared samplers (also used by the flow engine to tag regimes) -----------

std::vector<double> sample_spectrum(const Cone& cone, int n, RngStream& rs, double lo = 0.1,
                                    double hi = 10.0);

struct InteriorInstance {
    SymMatrix a, b;
    double k;
};

InteriorInstance sample_interior_instance(int n, RngStream& rs);

} // namespace exflow
