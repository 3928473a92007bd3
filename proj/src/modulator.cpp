#include "exflow/modulator.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace exflow {

namespace {

constexpr double kSignTol = 1e-12; // absolute tolerance so psi(s) = s passes both (iia) and (iib)

double logistic(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    double e = std::exp(s);
    return e / (1.0 + e);
}

} // namespace

Modulator Modulator::make(PsiFamily family, double alpha) {
    if (family == PsiFamily::neg_power && alpha <= 0.0)
        throw std::invalid_argument("neg_power: alpha must be positive");
    return Modulator(family, alpha);
}

Modulator Modulator::parse(std::string_view name) {
    std::size_t colon = name.find(':');
    std::string_view head = name.substr(0, colon);
    if (head == "identity") return make(PsiFamily::identity);
    if (head == "sqrt_shift") return make(PsiFamily::sqrt_shift);
    if (head == "softplus") return make(PsiFamily::softplus);
    if (head == "logcosh_shift") return make(PsiFamily::logcosh_shift);
    if (head == "neg_log_recip") return make(PsiFamily::neg_log_recip);
    if (head == "neg_log_ratio") return make(PsiFamily::neg_log_ratio);
    if (head == "neg_arctan_recip") return make(PsiFamily::neg_arctan_recip);
    if (head == "shifted_exp") return make(PsiFamily::shifted_exp);
    if (head == "neg_power") {
        if (colon == std::string_view::npos)
            throw std::invalid_argument("neg_power: expected alpha parameter");
        std::string_view params = name.substr(colon + 1);
        std::size_t eq = params.find('=');
        if (eq == std::string_view::npos || params.substr(0, eq) != "alpha")
            throw std::invalid_argument("neg_power: expected alpha=<value>");
        return make(PsiFamily::neg_power, std::stod(std::string(params.substr(eq + 1))));
    }
    throw std::invalid_argument("unknown modulator: " + std::string(name));
}

std::string Modulator::name() const {
    switch (family_) {
    case PsiFamily::identity: return "identity";
    case PsiFamily::sqrt_shift: return "sqrt_shift";
    case PsiFamily::softplus: return "softplus";
    case PsiFamily::logcosh_shift: return "logcosh_shift";
    case PsiFamily::neg_power: {
        char buf[48];
        std::snprintf(buf, sizeof buf, "neg_power:alpha=%g", alpha_);
        return buf;
    }
    case PsiFamily::neg_log_recip: return "neg_log_recip";
    case PsiFamily::neg_log_ratio: return "neg_log_ratio";
    case PsiFamily::neg_arctan_recip: return "neg_arctan_recip";
    case PsiFamily::shifted_exp: return "shifted_exp";
    }
    return "?";
}

bool Modulator::positive_domain_only() const {
    switch (family_) {
    case PsiFamily::neg_power:
    case PsiFamily::neg_log_recip:
    case PsiFamily::neg_log_ratio:
    case PsiFamily::neg_arctan_recip:
        return true;
    default:
        return false;
    }
}

void Modulator::require_domain(double s) const {
    if (positive_domain_only() && s <= 0.0)
        throw std::domain_error(name() + ": argument must be positive");
}

double Modulator::psi(double s) const {
    require_domain(s);
    switch (family_) {
    case PsiFamily::identity: return s;
    case PsiFamily::sqrt_shift: return std::sqrt(s * s + 1.0);
    case PsiFamily::softplus:
        return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    case PsiFamily::logcosh_shift:
        return std::abs(s) + std::log1p(std::exp(-2.0 * std::abs(s)));
    case PsiFamily::neg_power:
        if (alpha_ == 1.0) return -1.0 / s;
        return -std::pow(s, -alpha_);
    case PsiFamily::neg_log_recip: return -std::log1p(1.0 / s);
    case PsiFamily::neg_log_ratio: return -std::log1p(s) / s;
    case PsiFamily::neg_arctan_recip: return -std::atan(1.0 / s);
    case PsiFamily::shifted_exp: return s - std::exp(-s);
    }
    return 0.0;
}

double Modulator::dpsi(double s) const {
    require_domain(s);
    switch (family_) {
    case PsiFamily::identity: return 1.0;
    case PsiFamily::sqrt_shift: return s / std::sqrt(s * s + 1.0);
    case PsiFamily::softplus: return logistic(s);
    case PsiFamily::logcosh_shift: return std::tanh(s);
    case PsiFamily::neg_power:
        if (alpha_ == 1.0) return 1.0 / (s * s);
        return alpha_ * std::pow(s, -alpha_ - 1.0);
    case PsiFamily::neg_log_recip: return 1.0 / (s * (1.0 + s));
    case PsiFamily::neg_log_ratio: return std::log1p(s) / (s * s) - 1.0 / (s * (1.0 + s));
    case PsiFamily::neg_arctan_recip: return 1.0 / (1.0 + s * s);
    case PsiFamily::shifted_exp: return 1.0 + std::exp(-s);
    }
    return 0.0;
}

double Modulator::ddpsi(double s) const {
    require_domain(s);
    switch (family_) {
    case PsiFamily::identity: return 0.0;
    case PsiFamily::sqrt_shift: {
        double w = s * s + 1.0;
        return 1.0 / (w * std::sqrt(w));
    }
    case PsiFamily::softplus: {
        double p = logistic(s);
        return p * (1.0 - p);
    }
    case PsiFamily::logcosh_shift: {
        double t = std::tanh(s);
        return 1.0 - t * t;
    }
    case PsiFamily::neg_power:
        if (alpha_ == 1.0) return -2.0 / (s * s * s);
        return -alpha_ * (alpha_ + 1.0) * std::pow(s, -alpha_ - 2.0);
    case PsiFamily::neg_log_recip: {
        double sp = 1.0 + s;
        return -(2.0 * s + 1.0) / (s * s * sp * sp);
    }
    case PsiFamily::neg_log_ratio: {
        double sp = 1.0 + s;
        return (2.0 * s + 1.0) / (s * s * sp * sp) + 1.0 / (s * s * sp) -
               2.0 * std::log1p(s) / (s * s * s);
    }
    case PsiFamily::neg_arctan_recip: {
        double w = 1.0 + s * s;
        return -2.0 * s / (w * w);
    }
    case PsiFamily::shifted_exp: return -std::exp(-s);
    }
    return 0.0;
}

double psi(const Modulator& m, double s) { return m.psi(s); }
double dpsi(const Modulator& m, double s) { return m.dpsi(s); }
double ddpsi(const Modulator& m, double s) { return m.ddpsi(s); }

std::vector<double> log_grid(double lo, double hi, int points) {
    if (lo <= 0.0 || hi <= lo || points < 2)
        throw std::invalid_argument("log_grid: need 0 < lo < hi and >= 2 points");
    std::vector<double> g(points);
    double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) g[i] = lo * std::exp(i * step);
    return g;
}

namespace {

void record(ConditionFlag& flag, bool ok, double s, double value) {
    if (!ok && flag.holds) {
        flag.holds = false;
        flag.witness_s = s;
        flag.witness_value = value;
    }
}

} // namespace

ConditionReport check_conditions(const Modulator& m, const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("check_conditions: empty grid");
    ConditionReport rep;
    rep.grid_points = static_cast<int>(grid.size());
    rep.grid_lo = grid.front();
    rep.grid_hi = grid.back();
    for (double s : grid) {
        if (s <= 0.0) throw std::invalid_argument("check_conditions: grid points must be positive");
        double p = m.psi(s), p1 = m.dpsi(s), p2 = m.ddpsi(s);
        double euler = p1 * s - p;
        double iv = p2 * s + 2.0 * p1;
        // 1e-12 absolute floor plus a term-magnitude component; equality cases
        // (psi = s for (ii), neg_power alpha = 1 for (iv)) are evaluated as
        // differences of large near-cancelling terms at the grid edges
        double tol_ii = kSignTol * (1.0 + 0.1 * (std::abs(p1 * s) + std::abs(p)));
        double tol_iv = kSignTol * (1.0 + 0.1 * (std::abs(p2 * s) + 2.0 * std::abs(p1)));
        record(rep.i, p1 > 0.0, s, p1);
        record(rep.iia, euler <= tol_ii, s, euler);
        record(rep.iib, euler >= -tol_ii, s, euler);
        record(rep.iiia, p2 >= -kSignTol * (1.0 + 0.1 * std::abs(p2)), s, p2);
        record(rep.iiib, p2 <= kSignTol * (1.0 + 0.1 * std::abs(p2)), s, p2);
        record(rep.iv, iv >= -tol_iv, s, iv);
    }
    return rep;
}

ConditionReport check_conditions(const Modulator& m) {
    return check_conditions(m, log_grid(1e-3, 1e3, 200));
}

RegimeTag classify_regime(const ConditionReport& rep, bool f_is_convex,
                          bool f_is_inverse_concave) {
    bool convex_ok = f_is_convex && rep.i.holds && rep.iia.holds && rep.iiia.holds;
    bool inverse_ok =
        f_is_inverse_concave && rep.i.holds && rep.iib.holds && rep.iiib.holds && rep.iv.holds;
    if (convex_ok && inverse_ok) return RegimeTag::both;
    if (convex_ok) return RegimeTag::convex_theorem;
    if (inverse_ok) return RegimeTag::inverse_concave_theorem;
    return RegimeTag::neither;
}

std::string to_string(RegimeTag tag) {
    switch (tag) {
    case RegimeTag::convex_theorem: return "convex-theorem-applies";
    case RegimeTag::inverse_concave_theorem: return "inverse-concave-theorem-applies";
    case RegimeTag::both: return "both";
    case RegimeTag::neither: return "neither";
    }
    return "?";
}

} // namespace exflow
