#include "exflow/linalg.hpp"

#include "exflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace exflow {

SymMatrix::SymMatrix(int n, std::span<const double> entries) : SymMatrix(n) {
    if (entries.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("SymMatrix: entry count does not match order");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = entries[static_cast<std::size_t>(i) * n + j];
            double w = entries[static_cast<std::size_t>(j) * n + i];
            if (std::abs(v - w) > 1e-12 * (1.0 + std::abs(v)))
                throw std::invalid_argument("SymMatrix: input is not symmetric");
            a_[static_cast<std::size_t>(i) * n + j] = 0.5 * (v + w);
        }
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
    SymMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n_; ++i) m.set(i, i, d[i]);
    return m;
}

SymMatrix SymMatrix::identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
    return m;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& rhs) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += rhs.a_[i];
    return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& rhs) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= rhs.a_[i];
    return *this;
}

SymMatrix& SymMatrix::operator*=(double c) {
    for (double& v : a_) v *= c;
    return *this;
}

SymMatrix SymMatrix::shifted(double c) const {
    SymMatrix m = *this;
    for (int i = 0; i < n_; ++i) m.set(i, i, (*this)(i, i) + c);
    return m;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

double SymMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
}

double SymMatrix::dot(const SymMatrix& b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) s += a_[i] * b.a_[i];
    return s;
}

EigenDecomposition jacobi_eigen(const SymMatrix& input) {
    const int n = input.order();
    std::vector<double> a(input.data());
    std::vector<double> q(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) q[static_cast<std::size_t>(i) * n + i] = 1.0;

    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    auto qt = [&](int i, int j) -> double& { return q[static_cast<std::size_t>(i) * n + j]; };

    double fro2 = 0.0;
    for (double v : a) fro2 += v * v;
    const double stop = 1e-30 * std::max(fro2, 1e-300);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off2 = 0.0;
        for (int p = 0; p < n; ++p)
            for (int r = p + 1; r < n; ++r) off2 += 2.0 * at(p, r) * at(p, r);
        if (off2 <= stop) break;

        for (int p = 0; p < n; ++p) {
            for (int r = p + 1; r < n; ++r) {
                double apr = at(p, r);
                if (std::abs(apr) < 1e-300) continue;
                double theta = (at(r, r) - at(p, p)) / (2.0 * apr);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double tau = s / (1.0 + c);

                double app = at(p, p), arr = at(r, r);
                at(p, p) = app - t * apr;
                at(r, r) = arr + t * apr;
                at(p, r) = at(r, p) = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (i != p && i != r) {
                        double aip = at(i, p), air = at(i, r);
                        at(i, p) = at(p, i) = aip - s * (air + tau * aip);
                        at(i, r) = at(r, i) = air + s * (aip - tau * air);
                    }
                    double qip = qt(i, p), qir = qt(i, r);
                    qt(i, p) = qip - s * (qir + tau * qip);
                    qt(i, r) = qir + s * (qip - tau * qir);
                }
            }
        }
    }

    EigenDecomposition ed;
    ed.n = n;
    ed.eigenvalues.resize(n);
    for (int i = 0; i < n; ++i) ed.eigenvalues[i] = at(i, i);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return ed.eigenvalues[i] < ed.eigenvalues[j]; });

    EigenDecomposition out;
    out.n = n;
    out.eigenvalues.resize(n);
    out.eigenvectors.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int k = 0; k < n; ++k) {
        out.eigenvalues[k] = ed.eigenvalues[order[k]];
        for (int i = 0; i < n; ++i)
            out.eigenvectors[static_cast<std::size_t>(i) * n + k] = qt(i, order[k]);
    }
    return out;
}

SymMatrix reassemble(const EigenDecomposition& ed, std::span<const double> d) {
    const int n = ed.n;
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += ed.vec(i, k) * d[k] * ed.vec(j, k);
            m.set(i, j, s);
        }
    return m;
}

SymMatrix spd_inverse(const SymMatrix& a, double tol) {
    EigenDecomposition ed = jacobi_eigen(a);
    double scale = 0.0;
    for (double v : ed.eigenvalues) scale = std::max(scale, std::abs(v));
    std::vector<double> inv(ed.eigenvalues.size());
    for (std::size_t i = 0; i < inv.size(); ++i) {
        if (std::abs(ed.eigenvalues[i]) <= tol * std::max(scale, 1.0))
            throw std::domain_error("spd_inverse: matrix is numerically singular");
        inv[i] = 1.0 / ed.eigenvalues[i];
    }
    return reassemble(ed, inv);
}

SymMatrix sandwich(const SymMatrix& x, const SymMatrix& s) {
    const int n = x.order();
    // t = s * x
    std::vector<double> t(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += s(i, k) * x(k, j);
            t[static_cast<std::size_t>(i) * n + j] = acc;
        }
    SymMatrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += x(i, k) * t[static_cast<std::size_t>(k) * n + j];
            out.set(i, j, acc);
        }
    return out;
}

SymMatrix congruence(std::span<const double> q, const SymMatrix& s, int n) {
    // t = s * q
    std::vector<double> t(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) acc += s(i, k) * q[static_cast<std::size_t>(k) * n + j];
            t[static_cast<std::size_t>(i) * n + j] = acc;
        }
    SymMatrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += q[static_cast<std::size_t>(k) * n + i] * t[static_cast<std::size_t>(k) * n + j];
            out.set(i, j, acc);
        }
    return out;
}

std::vector<double> random_rotation(int n, RngStream& rs) {
    std::vector<double> q(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) q[static_cast<std::size_t>(i) * n + i] = 1.0;
    // two passes of Givens rotations over all coordinate planes
    for (int pass = 0; pass < 2; ++pass) {
        for (int p = 0; p < n; ++p) {
            for (int r = p + 1; r < n; ++r) {
                double ang = rs.uniform(0.0, 6.283185307179586476925286766559);
                double c = std::cos(ang), s = std::sin(ang);
                for (int i = 0; i < n; ++i) {
                    double vp = q[static_cast<std::size_t>(i) * n + p];
                    double vr = q[static_cast<std::size_t>(i) * n + r];
                    q[static_cast<std::size_t>(i) * n + p] = c * vp - s * vr;
                    q[static_cast<std::size_t>(i) * n + r] = s * vp + c * vr;
                }
            }
        }
    }
    return q;
}

SymMatrix random_with_spectrum(std::span<const double> lam, RngStream& rs) {
    const int n = static_cast<int>(lam.size());
    std::vector<double> r = random_rotation(n, rs);
    SymMatrix d = SymMatrix::diagonal(lam);
    // R D R^T = congruence with Q = R^T
    std::vector<double> rt(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            rt[static_cast<std::size_t>(i) * n + j] = r[static_cast<std::size_t>(j) * n + i];
    return congruence(rt, d, n);
}

} // namespace exflow
