#include "exflow/speed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace exflow {

namespace {

constexpr double kEigDegeneracyFactor = 1e-8; // relative threshold for repeated eigenvalues

// pow dominates the flow inner loops; the exponents there are root-family
// constants, so route the common ones to sqrt
inline double pow_fast(double b, double e) {
    if (e == 1.0) return b;
    if (e == 0.5) return std::sqrt(b);
    if (e == -0.5) return 1.0 / std::sqrt(b);
    if (e == -1.0) return 1.0 / b;
    if (e == 2.0) return b * b;
    return std::pow(b, e);
}

double parse_number(std::string_view text) {
    std::string s(text);
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad numeric parameter: " + s);
    return v;
}

// "k=2,l=1" -> accessor by key
double named_param(std::string_view params, std::string_view key) {
    std::size_t start = 0;
    while (start < params.size()) {
        std::size_t end = params.find(',', start);
        if (end == std::string_view::npos) end = params.size();
        std::string_view item = params.substr(start, end - start);
        std::size_t eq = item.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("expected key=value in speed parameters");
        if (item.substr(0, eq) == key) return parse_number(item.substr(eq + 1));
        start = end + 1;
    }
    throw std::invalid_argument(std::string("missing speed parameter: ") + std::string(key));
}

} // namespace

EigenTuple::EigenTuple(std::vector<double> values) : lam_(std::move(values)) {
    if (lam_.empty()) throw std::invalid_argument("EigenTuple: needs at least one entry");
    std::sort(lam_.begin(), lam_.end());
}

EigenTuple EigenTuple::scaled(double c) const {
    std::vector<double> v(lam_);
    for (double& x : v) x *= c;
    return EigenTuple(std::move(v));
}

EigenTuple EigenTuple::reciprocals() const {
    std::vector<double> v(lam_.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (lam_[i] <= 0.0) throw cone_error("reciprocals: entries must be positive");
        v[i] = 1.0 / lam_[i];
    }
    return EigenTuple(std::move(v));
}

namespace {

constexpr int kMaxOrder = 16;

// sigma_j of lam with up to two indices removed; incremental recursion
// e_t <- e_t + lam * e_{t-1}, descending t, no heap traffic
double esym_excluding(std::span<const double> lam, int j, int skip, int skip2 = -1) {
    const int n = static_cast<int>(lam.size());
    if (j < 0 || j > n) return 0.0;
    if (j == 0) return 1.0;
    if (j > kMaxOrder) throw std::invalid_argument("elementary_symmetric: order too large");
    double e[kMaxOrder + 1] = {1.0};
    for (int m = 0; m < n; ++m) {
        if (m == skip || m == skip2) continue;
        for (int t = j; t >= 1; --t) e[t] += lam[m] * e[t - 1];
    }
    return e[j];
}

} // namespace

double elementary_symmetric(std::span<const double> lam, int j) {
    return esym_excluding(lam, j, -1, -1);
}

double Cone::slack(std::span<const double> lam) const {
    if (kind == ConeKind::positive) {
        double s = lam[0];
        for (double v : lam) s = std::min(s, v);
        return s;
    }
    double s = elementary_symmetric(lam, 1);
    for (int j = 2; j <= k; ++j) s = std::min(s, elementary_symmetric(lam, j));
    return s;
}

std::string Cone::describe() const {
    if (kind == ConeKind::positive) return "positive";
    return "gamma_" + std::to_string(k);
}

ConeMembership cone_contains(const Cone& c, const EigenTuple& lam) {
    double s = c.slack(lam.values());
    return {s > 0.0, s};
}

SpeedFunction SpeedFunction::power_mean(int n, double r) {
    if (n < 1) throw std::invalid_argument("power_mean: n >= 1 required");
    if (r == 0.0) throw std::invalid_argument("power_mean: r must be nonzero");
    return SpeedFunction(SpeedFamily::power_mean, n, r, 0, 0, Cone::positive());
}

SpeedFunction SpeedFunction::sigma_root(int n, int k) {
    if (k < 1 || k > n) throw std::invalid_argument("sigma_root: require 1 <= k <= n");
    return SpeedFunction(SpeedFamily::sigma_root, n, 0.0, k, 0, Cone::gamma(k));
}

SpeedFunction SpeedFunction::sigma_ratio_root(int n, int k, int l) {
    if (k < 1 || k > n || l < 0 || l >= k)
        throw std::invalid_argument("sigma_ratio_root: require 0 <= l < k <= n");
    return SpeedFunction(SpeedFamily::sigma_ratio_root, n, 0.0, k, l, Cone::gamma(k));
}

SpeedFunction SpeedFunction::parse(std::string_view name, int n) {
    std::size_t colon = name.find(':');
    std::string_view head = name.substr(0, colon);
    std::string_view params = colon == std::string_view::npos ? std::string_view{} : name.substr(colon + 1);
    if (head == "power_mean") return power_mean(n, named_param(params, "r"));
    if (head == "sigma_root") return sigma_root(n, static_cast<int>(named_param(params, "k")));
    if (head == "sigma_ratio_root")
        return sigma_ratio_root(n, static_cast<int>(named_param(params, "k")),
                                static_cast<int>(named_param(params, "l")));
    throw std::invalid_argument("unknown speed function: " + std::string(name));
}

std::string SpeedFunction::name() const {
    char buf[64];
    switch (family_) {
    case SpeedFamily::power_mean:
        std::snprintf(buf, sizeof buf, "power_mean:r=%g", r_);
        return buf;
    case SpeedFamily::sigma_root:
        std::snprintf(buf, sizeof buf, "sigma_root:k=%d", k_);
        return buf;
    case SpeedFamily::sigma_ratio_root:
        std::snprintf(buf, sizeof buf, "sigma_ratio_root:k=%d,l=%d", k_, l_);
        return buf;
    }
    return "?";
}

void SpeedFunction::require_inside(std::span<const double> lam) const {
    if (static_cast<int>(lam.size()) != n_)
        throw std::invalid_argument("speed function: dimension mismatch");
    if (!cone_.contains(lam))
        throw cone_error(name() + ": argument outside cone " + cone_.describe());
}

double SpeedFunction::value(std::span<const double> lam) const {
    require_inside(lam);
    switch (family_) {
    case SpeedFamily::power_mean: {
        double s = 0.0;
        for (double v : lam) s += pow_fast(v, r_);
        return pow_fast(s / n_, 1.0 / r_);
    }
    case SpeedFamily::sigma_root:
        return pow_fast(elementary_symmetric(lam, k_), 1.0 / k_);
    case SpeedFamily::sigma_ratio_root: {
        double num = elementary_symmetric(lam, k_);
        double den = elementary_symmetric(lam, l_);
        return pow_fast(num / den, 1.0 / (k_ - l_));
    }
    }
    return 0.0;
}

std::vector<double> SpeedFunction::gradient(std::span<const double> lam) const {
    std::vector<double> g(n_);
    gradient_into(lam, g);
    return g;
}

void SpeedFunction::gradient_into(std::span<const double> lam, std::span<double> g) const {
    require_inside(lam);
    switch (family_) {
    case SpeedFamily::power_mean: {
        double f = value(lam);
        double outer = pow_fast(f, 1.0 - r_) / n_;
        for (int i = 0; i < n_; ++i) g[i] = outer * pow_fast(lam[i], r_ - 1.0);
        break;
    }
    case SpeedFamily::sigma_root: {
        double sk = elementary_symmetric(lam, k_);
        double outer = pow_fast(sk, 1.0 / k_ - 1.0) / k_;
        for (int i = 0; i < n_; ++i) g[i] = outer * esym_excluding(lam, k_ - 1, i);
        break;
    }
    case SpeedFamily::sigma_ratio_root: {
        double u = elementary_symmetric(lam, k_);
        double v = elementary_symmetric(lam, l_);
        double gq = u / v;
        double m = k_ - l_;
        double outer = pow_fast(gq, 1.0 / m - 1.0) / m;
        for (int i = 0; i < n_; ++i) {
            double ui = esym_excluding(lam, k_ - 1, i);
            double vi = esym_excluding(lam, l_ - 1, i);
            g[i] = outer * (ui * v - u * vi) / (v * v);
        }
        break;
    }
    }
}

SymMatrix SpeedFunction::hessian(std::span<const double> lam) const {
    require_inside(lam);
    SymMatrix h(n_);
    switch (family_) {
    case SpeedFamily::power_mean: {
        double f = value(lam);
        for (int i = 0; i < n_; ++i) {
            for (int j = i; j < n_; ++j) {
                double v = (1.0 - r_) * std::pow(f, 1.0 - 2.0 * r_) *
                           std::pow(lam[i], r_ - 1.0) * std::pow(lam[j], r_ - 1.0) /
                           (static_cast<double>(n_) * n_);
                if (i == j)
                    v += (r_ - 1.0) * std::pow(f, 1.0 - r_) * std::pow(lam[i], r_ - 2.0) / n_;
                h.set(i, j, v);
            }
        }
        break;
    }
    case SpeedFamily::sigma_root: {
        double sk = elementary_symmetric(lam, k_);
        double p = 1.0 / k_;
        for (int i = 0; i < n_; ++i) {
            double si = esym_excluding(lam, k_ - 1, i);
            for (int j = i; j < n_; ++j) {
                double sj = esym_excluding(lam, k_ - 1, j);
                double v = p * (p - 1.0) * std::pow(sk, p - 2.0) * si * sj;
                if (i != j)
                    v += p * std::pow(sk, p - 1.0) * esym_excluding(lam, k_ - 2, i, j);
                h.set(i, j, v);
            }
        }
        break;
    }
    case SpeedFamily::sigma_ratio_root: {
        double u = elementary_symmetric(lam, k_);
        double v = elementary_symmetric(lam, l_);
        double gq = u / v;
        double m = k_ - l_;
        double p = 1.0 / m;
        std::vector<double> du(n_), dv(n_), dg(n_);
        for (int i = 0; i < n_; ++i) {
            du[i] = esym_excluding(lam, k_ - 1, i);
            dv[i] = esym_excluding(lam, l_ - 1, i);
            dg[i] = (du[i] * v - u * dv[i]) / (v * v);
        }
        for (int i = 0; i < n_; ++i) {
            for (int j = i; j < n_; ++j) {
                double uij = i == j ? 0.0 : esym_excluding(lam, k_ - 2, i, j);
                double vij = i == j ? 0.0 : esym_excluding(lam, l_ - 2, i, j);
                double gij = uij / v - (du[i] * dv[j] + du[j] * dv[i]) / (v * v) -
                             u * vij / (v * v) + 2.0 * u * dv[i] * dv[j] / (v * v * v);
                double h2 = p * (p - 1.0) * std::pow(gq, p - 2.0) * dg[i] * dg[j] +
                            p * std::pow(gq, p - 1.0) * gij;
                h.set(i, j, h2);
            }
        }
        break;
    }
    }
    return h;
}

double SpeedFunction::value_at_ones() const {
    std::vector<double> ones(static_cast<std::size_t>(n_), 1.0);
    return value(ones);
}

double SpeedFunction::matrix_value(const SymMatrix& a) const {
    EigenDecomposition ed = jacobi_eigen(a);
    return value(ed.eigenvalues);
}

SymMatrix SpeedFunction::matrix_gradient(const SymMatrix& a) const {
    EigenDecomposition ed = jacobi_eigen(a);
    std::vector<double> g = gradient(ed.eigenvalues);
    return reassemble(ed, g);
}

double SpeedFunction::matrix_second_form(const SymMatrix& a, const SymMatrix& b) const {
    EigenDecomposition ed = jacobi_eigen(a);
    const int n = ed.n;
    std::vector<double> g = gradient(ed.eigenvalues);
    SymMatrix h = hessian(ed.eigenvalues);

    // B in A's eigenbasis
    SymMatrix bt = congruence(ed.eigenvectors, b, n);

    double norm = 0.0;
    for (double v : ed.eigenvalues) norm = std::max(norm, std::abs(v));
    const double eps_eig = kEigDegeneracyFactor * std::max(norm, 1e-300);

    double q = 0.0;
    for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r) q += h(p, r) * bt(p, p) * bt(r, r);
    for (int p = 0; p < n; ++p) {
        for (int r = 0; r < n; ++r) {
            if (p == r) continue;
            double gap = ed.eigenvalues[p] - ed.eigenvalues[r];
            double dd;
            if (std::abs(gap) < eps_eig) {
                // limit of the divided difference at a repeated eigenvalue
                dd = h(p, p) - h(p, r);
            } else {
                dd = (g[p] - g[r]) / gap;
            }
            q += dd * bt(p, r) * bt(p, r);
        }
    }
    return q;
}

double SpeedFunction::dual_value(std::span<const double> mu) const {
    for (double v : mu)
        if (v <= 0.0) throw cone_error("dual: argument must lie in the positive cone");
    std::vector<double> rec(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) rec[i] = 1.0 / mu[i];
    return 1.0 / value(rec);
}

double eval(const SpeedFunction& f, const EigenTuple& lam) { return f.value(lam.values()); }

std::vector<double> grad(const SpeedFunction& f, const EigenTuple& lam) {
    return f.gradient(lam.values());
}

SymMatrix hess(const SpeedFunction& f, const EigenTuple& lam) { return f.hessian(lam.values()); }

double dual_eval(const SpeedFunction& f, const EigenTuple& mu) { return f.dual_value(mu.values()); }

double matrix_eval(const SpeedFunction& f, const SymMatrix& a) { return f.matrix_value(a); }

SymMatrix matrix_grad(const SpeedFunction& f, const SymMatrix& a) { return f.matrix_gradient(a); }

double matrix_second_form(const SpeedFunction& f, const SymMatrix& a, const SymMatrix& b) {
    return f.matrix_second_form(a, b);
}

} // namespace exflow
