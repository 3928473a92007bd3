#pragma once

#include "exflow/linalg.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace exflow {

// An eigenvalue (or principal-curvature) tuple is thrown whenever an argument
// leaves the cone a speed function is defined on.
class cone_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Ordered tuple of eigenvalues, ascending, so front() is the smallest
// principal curvature and back() the largest.
class EigenTuple {
public:
    explicit EigenTuple(std::vector<double> values);
    EigenTuple(std::initializer_list<double> values)
        : EigenTuple(std::vector<double>(values)) {}

    int size() const { return static_cast<int>(lam_.size()); }
    double operator[](int i) const { return lam_[i]; }
    double min() const { return lam_.front(); }
    double max() const { return lam_.back(); }
    std::span<const double> values() const { return lam_; }

    EigenTuple scaled(double c) const;
    EigenTuple reciprocals() const; // requires all entries > 0

private:
    std::vector<double> lam_;
};

// elementary symmetric polynomial sigma_j of the given values
double elementary_symmetric(std::span<const double> lam, int j);

enum class ConeKind { positive, gamma_k };

struct Cone {
    ConeKind kind = ConeKind::positive;
    int k = 0; // order for gamma_k

    static Cone positive() { return {ConeKind::positive, 0}; }
    static Cone gamma(int k) { return {ConeKind::gamma_k, k}; }

    // slack > 0 iff lam lies strictly inside: min lambda_i for the positive
    // cone, min_{j<=k} sigma_j for Gamma_k
    double slack(std::span<const double> lam) const;
    bool contains(std::span<const double> lam) const { return slack(lam) > 0.0; }
    std::string describe() const;
};

struct ConeMembership {
    bool inside;
    double slack;
};

ConeMembership cone_contains(const Cone& c, const EigenTuple& lam);

enum class SpeedFamily { power_mean, sigma_root, sigma_ratio_root };

// Symmetric, 1-homogeneous, monotone speed function of the principal
// curvatures. Three built-in families:
//   power_mean(r)        ((1/n) sum lambda_i^r)^(1/r) on the positive cone
//   sigma_root(k)        sigma_k^(1/k) on Gamma_k
//   sigma_ratio_root(k,l) (sigma_k/sigma_l)^(1/(k-l)) on Gamma_k
// Derivatives are closed-form per family; finite differences live only in
// the tests.
class SpeedFunction {
public:
    static SpeedFunction power_mean(int n, double r);
    static SpeedFunction sigma_root(int n, int k);
    static SpeedFunction sigma_ratio_root(int n, int k, int l);

    // config names: "power_mean:r=1", "sigma_root:k=2", "sigma_ratio_root:k=2,l=1"
    static SpeedFunction parse(std::string_view name, int n);

    SpeedFamily family() const { return family_; }
    int dim() const { return n_; }
    const Cone& cone() const { return cone_; }
    std::string name() const;

    double value(std::span<const double> lam) const;
    std::vector<double> gradient(std::span<const double> lam) const;
    void gradient_into(std::span<const double> lam, std::span<double> out) const;
    SymMatrix hessian(std::span<const double> lam) const;

    // f(1, ..., 1)
    double value_at_ones() const;

    double matrix_value(const SymMatrix& a) const;
    SymMatrix matrix_gradient(const SymMatrix& a) const;
    // second derivative quadratic form  d^2/ds^2 F(A + sB) at s = 0
    double matrix_second_form(const SymMatrix& a, const SymMatrix& b) const;

    // dual f*(mu) = 1 / f(1/mu_1, ..., 1/mu_n); defined on the positive cone
    double dual_value(std::span<const double> mu) const;

private:
    SpeedFunction(SpeedFamily fam, int n, double r, int k, int l, Cone cone)
        : family_(fam), n_(n), r_(r), k_(k), l_(l), cone_(cone) {}

    void require_inside(std::span<const double> lam) const;

    SpeedFamily family_;
    int n_;
    double r_; // power mean exponent
    int k_ = 0, l_ = 0;
    Cone cone_;
};

// Spec-facing wrappers on EigenTuple arguments.
double eval(const SpeedFunction& f, const EigenTuple& lam);
std::vector<double> grad(const SpeedFunction& f, const EigenTuple& lam);
SymMatrix hess(const SpeedFunction& f, const EigenTuple& lam);
double dual_eval(const SpeedFunction& f, const EigenTuple& mu);
double matrix_eval(const SpeedFunction& f, const SymMatrix& a);
SymMatrix matrix_grad(const SpeedFunction& f, const SymMatrix& a);
double matrix_second_form(const SpeedFunction& f, const SymMatrix& a, const SymMatrix& b);

} // namespace exflow
