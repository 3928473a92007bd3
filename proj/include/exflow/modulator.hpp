#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace exflow {

enum class PsiFamily {
    identity,        // s
    sqrt_shift,      // sqrt(s^2 + 1)
    softplus,        // log(1 + e^s)
    logcosh_shift,   // log(e^s + e^-s)
    neg_power,       // -s^-alpha
    neg_log_recip,   // -log(1 + 1/s)
    neg_log_ratio,   // -log(1 + s)/s
    neg_arctan_recip,// -arctan(1/s)
    shifted_exp      // s - e^-s
};

// Modulating function Psi with two analytic derivatives. Families whose
// formulas require a positive argument report positive_domain_only(); the
// remaining families evaluate on all of R, which the flow relies on when the
// underlying speed passes through zero.
class Modulator {
public:
    static Modulator identity() { return Modulator(PsiFamily::identity, 0.0); }
    static Modulator make(PsiFamily family, double alpha = 0.0);
    static Modulator parse(std::string_view name);

    PsiFamily family() const { return family_; }
    double alpha() const { return alpha_; }
    std::string name() const;
    bool positive_domain_only() const;

    double psi(double s) const;
    double dpsi(double s) const;
    double ddpsi(double s) const;

private:
    Modulator(PsiFamily family, double alpha) : family_(family), alpha_(alpha) {}
    void require_domain(double s) const;

    PsiFamily family_;
    double alpha_;
};

double psi(const Modulator& m, double s);
double dpsi(const Modulator& m, double s);
double ddpsi(const Modulator& m, double s);

// One structural sign condition checked pointwise on a grid.
struct ConditionFlag {
    bool holds = true;
    double witness_s = 0.0;   // first violation (smallest grid point)
    double witness_value = 0.0;
};

// Grid-sampled verdicts for the structural conditions
//   (i)    psi' > 0
//   (iia)  psi' s - psi <= 0      (iib)  psi' s - psi >= 0
//   (iiia) psi'' >= 0             (iiib) psi'' <= 0
//   (iv)   psi'' s + 2 psi' >= 0
// Verdicts are "holds on the grid", never a proof.
struct ConditionReport {
    ConditionFlag i, iia, iib, iiia, iiib, iv;
    int grid_points = 0;
    double grid_lo = 0.0, grid_hi = 0.0;
};

std::vector<double> log_grid(double lo, double hi, int points);

ConditionReport check_conditions(const Modulator& m, const std::vector<double>& grid);
ConditionReport check_conditions(const Modulator& m); // default 200-point grid on [1e-3, 1e3]

enum class RegimeTag { convex_theorem, inverse_concave_theorem, both, neither };

RegimeTag classify_regime(const ConditionReport& report, bool f_is_convex,
                          bool f_is_inverse_concave);

std::string to_string(RegimeTag tag);

} // namespace exflow
