#include "exflow/structure_lab.hpp"

#include "exflow/parallel.hpp"
#include "exflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace exflow {

namespace {

constexpr double kMinRelativeGap = 1e-2; // eigenvalue separation enforced on jittered samples

std::vector<double> flatten(const SymMatrix& m) { return m.data(); }

std::vector<double> sample_distinct_positive(int n, RngStream& rs) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<double> lam(n);
        for (double& v : lam) v = rs.log_uniform(0.1, 10.0);
        std::sort(lam.begin(), lam.end());
        bool ok = true;
        for (int i = 0; i + 1 < n; ++i)
            if (lam[i + 1] - lam[i] < kMinRelativeGap * lam[i]) ok = false;
        if (ok) return lam;
    }
    throw std::runtime_error("sample_distinct_positive: could not separate eigenvalues");
}

SymMatrix random_direction(int n, RngStream& rs) {
    SymMatrix b(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) b.set(i, j, rs.normal());
    return b;
}

// min over chunked trials computed into per-trial slots, then reduced in
// index order: deterministic for any thread count
template <typename TrialFn>
InequalityReport run_trials(std::string check, long trials, double tol, TrialFn&& fn) {
    std::vector<double> slack(static_cast<std::size_t>(trials),
                              std::numeric_limits<double>::infinity());
    std::vector<char> skipped(static_cast<std::size_t>(trials), 0);
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        if (!fn(static_cast<std::uint64_t>(t), slack[t])) skipped[t] = 1;
    });
    InequalityReport rep;
    rep.check = std::move(check);
    rep.trials = trials;
    rep.tol = tol;
    std::uint64_t worst = 0;
    for (long t = 0; t < trials; ++t) {
        if (skipped[t]) {
            ++rep.skipped;
            continue;
        }
        if (slack[t] < rep.min_slack) {
            rep.min_slack = slack[t];
            worst = static_cast<std::uint64_t>(t);
        }
    }
    rep.witness.trial = worst;
    rep.finish();
    return rep;
}

} // namespace

std::vector<double> sample_spectrum(const Cone& cone, int n, RngStream& rs, double lo, double hi) {
    if (cone.kind == ConeKind::positive || cone.k >= n) {
        std::vector<double> lam(n);
        for (double& v : lam) v = rs.log_uniform(lo, hi);
        return lam;
    }
    // Gamma_k with k < n admits some negative entries; mix positive draws with
    // rejection-sampled sign-indefinite ones
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<double> lam(n);
        bool wide = rs.uniform01() < 0.5;
        for (double& v : lam) v = wide ? rs.uniform(-1.0, hi) : rs.log_uniform(lo, hi);
        if (cone.slack(lam) > 0.05) return lam;
    }
    std::vector<double> lam(n);
    for (double& v : lam) v = rs.log_uniform(lo, hi);
    return lam;
}

InequalityReport check_convexity(const SpeedFunction& f, long trials, std::uint64_t seed,
                                 double tol) {
    const int n = f.dim();
    std::vector<double> support_slack(static_cast<std::size_t>(trials),
                                      std::numeric_limits<double>::infinity());
    WitnessSample best;
    auto rep = run_trials("convexity:" + f.name(), trials, tol, [&](std::uint64_t t, double& out) {
        RngStream rs(seed, t);
        try {
            std::vector<double> lam_a = sample_spectrum(f.cone(), n, rs);
            SymMatrix a = random_with_spectrum(lam_a, rs);
            SymMatrix dir = random_direction(n, rs);
            double hess_form = f.matrix_second_form(a, dir);

            std::vector<double> lam_b = sample_spectrum(f.cone(), n, rs);
            SymMatrix b = random_with_spectrum(lam_b, rs);
            double support = f.matrix_value(b) - f.matrix_gradient(a).dot(b);
            support_slack[t] = support;
            out = std::min(hess_form, support);
            return true;
        } catch (const cone_error&) {
            return false; // sample left the cone; skipped and logged
        }
    });
    double sup_min = std::numeric_limits<double>::infinity();
    for (double v : support_slack) sup_min = std::min(sup_min, v);
    rep.extras.emplace_back("support_consequence_min_slack", sup_min);

    // reconstruct the worst sample for the witness
    RngStream rs(seed, rep.witness.trial);
    std::vector<double> lam_a = sample_spectrum(f.cone(), n, rs);
    SymMatrix a = random_with_spectrum(lam_a, rs);
    SymMatrix dir = random_direction(n, rs);
    rep.witness.lambda = lam_a;
    rep.witness.matrix_a = flatten(a);
    rep.witness.matrix_b = flatten(dir);
    return rep;
}

namespace {

struct InverseConcavityForms {
    double matrix_min_eig;
    double pairwise_min;
};

InverseConcavityForms inverse_concave_forms(const SpeedFunction& f, std::span<const double> lam,
                                            bool general) {
    const int n = static_cast<int>(lam.size());
    double fv = f.value(lam);
    std::vector<double> g = f.gradient(lam);
    SymMatrix m = f.hessian(lam);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double v = m(i, j);
            if (general) v -= (2.0 / fv) * g[i] * g[j];
            if (i == j) v += 2.0 * g[i] / lam[i];
            m.set(i, j, v);
        }
    }
    double min_eig = jacobi_eigen(m).eigenvalues.front();
    double pair_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = (g[i] - g[j]) / (lam[i] - lam[j]) + g[i] / lam[j] + g[j] / lam[i];
            pair_min = std::min(pair_min, v);
        }
    return {min_eig, pair_min};
}

} // namespace

InequalityReport check_inverse_concave_general(const SpeedFunction& f, long trials,
                                               std::uint64_t seed, double tol) {
    const int n = f.dim();
    auto rep = run_trials("inverse_concave_general:" + f.name(), trials, tol,
                          [&](std::uint64_t t, double& out) {
                              RngStream rs(seed, t);
                              std::vector<double> lam = sample_distinct_positive(n, rs);
                              auto forms = inverse_concave_forms(f, lam, true);
                              out = std::min(forms.matrix_min_eig, forms.pairwise_min);
                              return true;
                          });
    RngStream rs(seed, rep.witness.trial);
    rep.witness.lambda = sample_distinct_positive(n, rs);
    return rep;
}

InequalityReport check_inverse_concave_homog(const SpeedFunction& f, long trials,
                                             std::uint64_t seed, double tol) {
    const int n = f.dim();
    std::vector<char> disagree(static_cast<std::size_t>(trials), 0);
    auto rep = run_trials("inverse_concave_homog:" + f.name(), trials, tol,
                          [&](std::uint64_t t, double& out) {
                              RngStream rs(seed, t);
                              std::vector<double> lam = sample_distinct_positive(n, rs);
                              auto homog = inverse_concave_forms(f, lam, false);
                              auto general = inverse_concave_forms(f, lam, true);
                              double sh = std::min(homog.matrix_min_eig, homog.pairwise_min);
                              double sg = std::min(general.matrix_min_eig, general.pairwise_min);
                              // verdict agreement away from the tolerance band
                              if (std::abs(sh) > 10.0 * tol && std::abs(sg) > 10.0 * tol &&
                                  (sh >= -tol) != (sg >= -tol))
                                  disagree[t] = 1;
                              out = sh;
                              return true;
                          });
    long disagreements = 0;
    for (char c : disagree) disagreements += c;
    rep.extras.emplace_back("criterion_disagreements", static_cast<double>(disagreements));
    RngStream rs(seed, rep.witness.trial);
    rep.witness.lambda = sample_distinct_positive(n, rs);
    return rep;
}

double scalar_psi_convex_slack(const Modulator& m, double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw std::domain_error("scalar slack: arguments must be positive");
    return m.psi(b) - m.psi(a) + m.dpsi(a) * (a - b);
}

double scalar_psi_iv_slack(const Modulator& m, double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw std::domain_error("scalar slack: arguments must be positive");
    return m.psi(b) - m.psi(a) - m.dpsi(a) * a * a * (1.0 / a - 1.0 / b);
}

namespace {

InequalityReport verify_scalar(const std::string& label, const Modulator& m, long trials,
                               std::uint64_t seed, double tol, bool iv) {
    auto rep = run_trials(label + ":" + m.name(), trials, tol, [&](std::uint64_t t, double& out) {
        RngStream rs(seed, t);
        double a = rs.log_uniform(1e-2, 1e2);
        double b = rs.log_uniform(1e-2, 1e2);
        out = iv ? scalar_psi_iv_slack(m, a, b) : scalar_psi_convex_slack(m, a, b);
        return true;
    });
    RngStream rs(seed, rep.witness.trial);
    rep.witness.scalar_a = rs.log_uniform(1e-2, 1e2);
    rep.witness.scalar_b = rs.log_uniform(1e-2, 1e2);
    return rep;
}

} // namespace

InequalityReport verify_scalar_psi_convex(const Modulator& m, long trials, std::uint64_t seed,
                                          double tol) {
    return verify_scalar("scalar_psi_convex", m, trials, seed, tol, false);
}

InequalityReport verify_scalar_psi_iv(const Modulator& m, long trials, std::uint64_t seed,
                                      double tol) {
    return verify_scalar("scalar_psi_iv", m, trials, seed, tol, true);
}

double interior_bracket(const SpeedFunction& f, const SymMatrix& a, const SymMatrix& b, double k,
                        std::span<const double> lambda_rowmajor) {
    const int n = a.order();
    SymMatrix df = f.matrix_gradient(a);
    SymMatrix x = a.shifted(-k);
    SymMatrix y = b.shifted(-k);
    auto lam = [&](int i, int p) { return lambda_rowmajor[static_cast<std::size_t>(i) * n + p]; };

    double value = -df.dot(x);
    // linear term: 2 sum_{ip} Lambda_ip (dF X)_ip
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < n; ++p) {
            double dfx = 0.0;
            for (int j = 0; j < n; ++j) dfx += df(i, j) * x(p, j);
            value += 2.0 * lam(i, p) * dfx;
        }
    // quadratic term: - sum dF_ij Lambda_ip Lambda_jq Y_pq
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < n; ++p)
                for (int q = 0; q < n; ++q) acc += lam(i, p) * lam(j, q) * y(p, q);
            value -= df(i, j) * acc;
        }
    return value;
}

std::vector<double> interior_optimal_lambda(const SymMatrix& a, const SymMatrix& b, double k) {
    const int n = a.order();
    SymMatrix x = a.shifted(-k);
    SymMatrix yinv = spd_inverse(b.shifted(-k));
    std::vector<double> lam(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int p = 0; p < n; ++p) {
            double acc = 0.0;
            for (int t = 0; t < n; ++t) acc += x(i, t) * yinv(t, p);
            lam[static_cast<std::size_t>(i) * n + p] = acc;
        }
    return lam;
}

namespace {

void require_interior_preconditions(const SymMatrix& a, const SymMatrix& b, double k) {
    if (k <= 0.0) throw std::invalid_argument("interior inequality: k must be positive");
    double la = jacobi_eigen(a).eigenvalues.front();
    double lb = jacobi_eigen(b).eigenvalues.front();
    if (la <= k) throw std::invalid_argument("interior inequality: lambda_min(A) must exceed k");
    if (lb <= k) throw std::invalid_argument("interior inequality: lambda_min(B) must exceed k");
}

} // namespace

double interior_q(const SpeedFunction& f, const Modulator& m, const SymMatrix& a,
                  const SymMatrix& b, double k, double z) {
    require_interior_preconditions(a, b, k);
    if (z < 0.0 || z > k * (1.0 + 1e-12))
        throw std::invalid_argument("interior q: z must lie in [0, k]");
    z = std::min(z, k);
    SymMatrix x = a.shifted(-z);
    SymMatrix y = b.shifted(-z);
    SymMatrix bracket = x - sandwich(x, spd_inverse(y));
    double fa = f.matrix_value(a);
    double fb = f.matrix_value(b);
    return m.psi(fb) - m.psi(fa) - m.dpsi(fa) * f.matrix_gradient(a).dot(bracket);
}

double interior_inequality_slack(const SpeedFunction& f, const Modulator& m, const SymMatrix& a,
                                 const SymMatrix& b, double k) {
    return interior_q(f, m, a, b, k, k);
}

InteriorInstance sample_interior_instance(int n, RngStream& rs) {
    std::vector<double> lam_a(n), lam_b(n);
    for (double& v : lam_a) v = rs.log_uniform(0.1, 10.0);
    for (double& v : lam_b) v = rs.log_uniform(0.1, 10.0);
    SymMatrix a = random_with_spectrum(lam_a, rs);
    SymMatrix b = random_with_spectrum(lam_b, rs);
    double la = *std::min_element(lam_a.begin(), lam_a.end());
    double lb = *std::min_element(lam_b.begin(), lam_b.end());
    double k = rs.uniform(1e-6, 0.9) * std::min(la, lb);
    return {std::move(a), std::move(b), k};
}

InequalityReport verify_interior_inequality(const SpeedFunction& f, const Modulator& m,
                                            long trials, std::uint64_t seed, double tol) {
    const int n = f.dim();
    auto rep = run_trials("interior:" + f.name() + "+" + m.name(), trials, tol,
                          [&](std::uint64_t t, double& out) {
                              RngStream rs(seed, t);
                              InteriorInstance inst = sample_interior_instance(n, rs);
                              out = interior_inequality_slack(f, m, inst.a, inst.b, inst.k);
                              return true;
                          });
    RngStream rs(seed, rep.witness.trial);
    InteriorInstance inst = sample_interior_instance(n, rs);
    rep.witness.matrix_a = flatten(inst.a);
    rep.witness.matrix_b = flatten(inst.b);
    rep.witness.k = inst.k;
    return rep;
}

bool verify_q_monotone(const SpeedFunction& f, const Modulator& m, const SymMatrix& a,
                       const SymMatrix& b, double k, const std::vector<double>& z_grid,
                       double tol) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double z : z_grid) {
        double q = interior_q(f, m, a, b, k, z);
        if (q < prev - tol) return false;
        prev = q;
    }
    return true;
}

InequalityReport verify_q_monotone_sampled(const SpeedFunction& f, const Modulator& m, long trials,
                                           std::uint64_t seed, int grid_points, double tol) {
    const int n = f.dim();
    auto rep = run_trials("q_monotone:" + f.name() + "+" + m.name(), trials, tol,
                          [&](std::uint64_t t, double& out) {
                              RngStream rs(seed, t);
                              InteriorInstance inst = sample_interior_instance(n, rs);
                              double prev = std::numeric_limits<double>::quiet_NaN();
                              double min_inc = std::numeric_limits<double>::infinity();
                              for (int j = 0; j < grid_points; ++j) {
                                  double z = inst.k * (static_cast<double>(j) / (grid_points - 1));
                                  double q = interior_q(f, m, inst.a, inst.b, inst.k, z);
                                  if (j > 0) min_inc = std::min(min_inc, q - prev);
                                  prev = q;
                              }
                              out = min_inc;
                              return true;
                          });
    return rep;
}

double boundary_form_value(const SpeedFunction& f, const Modulator& m, const EigenTuple& lam,
                           const SymMatrix& b) {
    const int n = lam.size();
    if (b.order() != n) throw std::invalid_argument("boundary form: dimension mismatch");
    if (std::abs(b(0, 0)) > 1e-14 * (1.0 + b.frobenius_norm()))
        throw std::invalid_argument("boundary form: B_11 must vanish");
    for (int i = 0; i + 1 < n; ++i)
        if (!(lam[i] < lam[i + 1]))
            throw std::invalid_argument("boundary form: eigenvalues must be strictly increasing");
    if (lam.min() <= 0.0) throw cone_error("boundary form: eigenvalues must be positive");

    std::vector<double> g = f.gradient(lam.values());
    SymMatrix h = f.hessian(lam.values());
    double fv = f.value(lam.values());

    double q = 0.0;
    for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r) q += h(p, r) * b(p, p) * b(r, r);
    for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r) {
            if (p == r) continue;
            q += (g[p] - g[r]) / (lam[p] - lam[r]) * b(p, r) * b(p, r);
        }
    double trace_dir = 0.0;
    for (int p = 0; p < n; ++p) trace_dir += g[p] * b(p, p);
    q += m.ddpsi(fv) / m.dpsi(fv) * trace_dir * trace_dir;
    for (int p = 0; p < n; ++p)
        for (int r = 1; r < n; ++r) q += 2.0 * g[p] / (lam[r] - lam[0]) * b(p, r) * b(p, r);
    return q;
}

double boundary_lambda_objective(const SpeedFunction& f, const EigenTuple& lam, const SymMatrix& b,
                                 std::span<const double> lambda_rowmajor) {
    const int n = lam.size();
    std::vector<double> g = f.gradient(lam.values());
    auto lm = [&](int i, int p) { return lambda_rowmajor[static_cast<std::size_t>(i) * n + p]; };
    double value = 0.0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(lm(i, 0)) > 0.0)
            throw std::invalid_argument("boundary objective: first Lambda column must vanish");
        double lin = 0.0, quad = 0.0;
        for (int p = 1; p < n; ++p) {
            lin += lm(i, p) * b(i, p);
            quad += lm(i, p) * lm(i, p) * (lam[p] - lam[0]);
        }
        value += 2.0 * g[i] * (2.0 * lin - quad);
    }
    return value;
}

std::vector<double> boundary_optimal_lambda(const EigenTuple& lam, const SymMatrix& b) {
    const int n = lam.size();
    std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int p = 1; p < n; ++p)
            out[static_cast<std::size_t>(i) * n + p] = b(i, p) / (lam[p] - lam[0]);
    return out;
}

namespace {

EigenTuple sample_boundary_lambda(int n, RngStream& rs) {
    return EigenTuple(sample_distinct_positive(n, rs));
}

SymMatrix sample_boundary_direction(int n, RngStream& rs) {
    SymMatrix b = random_direction(n, rs);
    b.set(0, 0, 0.0);
    return b;
}

} // namespace

InequalityReport verify_boundary_form(const SpeedFunction& f, const Modulator& m, long trials,
                                      std::uint64_t seed, double tol) {
    const int n = f.dim();
    auto rep = run_trials("boundary:" + f.name() + "+" + m.name(), trials, tol,
                          [&](std::uint64_t t, double& out) {
                              RngStream rs(seed, t);
                              EigenTuple lam = sample_boundary_lambda(n, rs);
                              SymMatrix b = sample_boundary_direction(n, rs);
                              out = boundary_form_value(f, m, lam, b);
                              return true;
                          });
    RngStream rs(seed, rep.witness.trial);
    EigenTuple lam = sample_boundary_lambda(n, rs);
    SymMatrix b = sample_boundary_direction(n, rs);
    rep.witness.lambda.assign(lam.values().begin(), lam.values().end());
    rep.witness.matrix_b = flatten(b);
    return rep;
}

AdmissibilityReport verify_admissibility(const SpeedFunction& f, long trials, std::uint64_t seed) {
    const int n = f.dim();
    AdmissibilityReport rep;
    rep.trials = trials;
    for (long t = 0; t < trials; ++t) {
        RngStream rs(seed, static_cast<std::uint64_t>(t));
        std::vector<double> lam = sample_spectrum(f.cone(), n, rs);
        double fv = f.value(lam);
        rep.value_min = std::min(rep.value_min, fv);
        std::vector<double> g = f.gradient(lam);
        double euler = 0.0;
        for (int i = 0; i < n; ++i) {
            rep.gradient_min = std::min(rep.gradient_min, g[i]);
            euler += g[i] * lam[i];
        }
        rep.euler_max_rel = std::max(rep.euler_max_rel, std::abs(euler - fv) / std::abs(fv));
        // random transposition suffices to generate the symmetric group
        if (n > 1) {
            std::vector<double> perm = lam;
            int i = static_cast<int>(rs.uniform_index(n));
            int j = static_cast<int>(rs.uniform_index(n));
            std::swap(perm[i], perm[j]);
            rep.symmetry_max_dev = std::max(rep.symmetry_max_dev, std::abs(f.value(perm) - fv));
        }
        double c = rs.log_uniform(0.1, 10.0);
        std::vector<double> scaled = lam;
        for (double& v : scaled) v *= c;
        rep.homogeneity_max_rel =
            std::max(rep.homogeneity_max_rel, std::abs(f.value(scaled) - c * fv) / (c * fv));
    }
    rep.pass = rep.value_min > 0.0 && rep.gradient_min > 0.0 && rep.euler_max_rel <= 1e-10 &&
               rep.symmetry_max_dev <= 1e-12 && rep.homogeneity_max_rel <= 1e-10;
    return rep;
}

DualReport verify_dual(const SpeedFunction& f, long trials, std::uint64_t seed) {
    const int n = f.dim();
    DualReport rep;
    rep.trials = trials;
    for (long t = 0; t < trials; ++t) {
        RngStream rs(seed, static_cast<std::uint64_t>(t));
        std::vector<double> mu(n), rec(n);
        for (double& v : mu) v = rs.log_uniform(0.1, 10.0);
        for (int i = 0; i < n; ++i) rec[i] = 1.0 / mu[i];
        rep.identity_max_residual = std::max(
            rep.identity_max_residual, std::abs(f.dual_value(mu) * f.value(rec) - 1.0));
        double f_back = 1.0 / f.dual_value(rec); // f** evaluated at mu
        rep.involution_max_rel =
            std::max(rep.involution_max_rel, std::abs(f_back - f.value(mu)) / f.value(mu));
    }
    rep.pass = rep.identity_max_residual <= 1e-12 && rep.involution_max_rel <= 1e-10;
    return rep;
}

PinchingEstimate estimate_pinching_constant(const SpeedFunction& f, double C, long samples,
                                            std::uint64_t seed) {
    const int n = f.dim();
    PinchingEstimate est;
    est.samples = samples;
    std::vector<double> ratio(static_cast<std::size_t>(samples), 0.0);
    std::vector<double> boundary_fstar(static_cast<std::size_t>(samples),
                                       std::numeric_limits<double>::infinity());
    parallel_for(static_cast<std::size_t>(samples), [&](std::size_t t) {
        RngStream rs(seed, t);
        // spread in decades drawn per sample so rays from the center of the
        // cone out to its boundary are all represented
        double spread = rs.log_uniform(1e-3, 6.0);
        std::vector<double> tau(n);
        for (double& v : tau) v = std::pow(10.0, -rs.uniform01() * spread);
        double mx = *std::max_element(tau.begin(), tau.end());
        for (double& v : tau) v /= mx; // tau_max = 1
        double mn = *std::min_element(tau.begin(), tau.end());
        double fstar = f.dual_value(tau);
        if (mn <= 1e-4) boundary_fstar[t] = fstar;
        if (1.0 <= C * fstar) ratio[t] = 1.0 / mn;
    });
    for (long t = 0; t < samples; ++t) {
        if (ratio[t] > 0.0) {
            ++est.feasible_count;
            est.ratio_sup = std::max(est.ratio_sup, ratio[t]);
        }
        est.boundary_min_fstar = std::min(est.boundary_min_fstar, boundary_fstar[t]);
    }
    est.feasible = est.feasible_count > 0;
    // the dual of an admissible f is bounded by f*(1,...,1) after the
    // tau_max = 1 normalization, so "decays" means small against that scale
    std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
    est.dual_decays_on_boundary = est.boundary_min_fstar < 1e-2 * f.dual_value(ones);
    return est;
}

} // namespace exflow
