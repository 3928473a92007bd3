#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace exflow {

class RngStream;

// Dense symmetric matrix of small order (the library targets n <= 8).
// Symmetry is enforced on construction; entries are stored row-major in full.
class SymMatrix {
public:
    SymMatrix() : n_(0) {}
    explicit SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {
        if (n < 1) throw std::invalid_argument("SymMatrix: order must be >= 1");
    }
    SymMatrix(int n, std::span<const double> entries);

    static SymMatrix diagonal(std::span<const double> d);
    static SymMatrix identity(int n);

    int order() const { return n_; }

    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    // keeps the matrix symmetric by writing both (i,j) and (j,i)
    void set(int i, int j, double v) {
        a_[static_cast<std::size_t>(i) * n_ + j] = v;
        a_[static_cast<std::size_t>(j) * n_ + i] = v;
    }

    SymMatrix& operator+=(const SymMatrix& rhs);
    SymMatrix& operator-=(const SymMatrix& rhs);
    SymMatrix& operator*=(double c);
    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
    friend SymMatrix operator*(double c, SymMatrix a) { return a *= c; }

    // add c to every diagonal entry (A + c I)
    SymMatrix shifted(double c) const;

    double trace() const;
    double frobenius_norm() const;

    // sum_ij A_ij B_ij
    double dot(const SymMatrix& b) const;

    const std::vector<double>& data() const { return a_; }

private:
    int n_;
    std::vector<double> a_;
};

struct EigenDecomposition {
    std::vector<double> eigenvalues;        // ascending
    std::vector<double> eigenvectors;       // column k = eigenvector of eigenvalues[k], row-major n x n
    int n = 0;

    double vec(int i, int k) const { return eigenvectors[static_cast<std::size_t>(i) * n + k]; }
};

// Cyclic Jacobi rotations; robust for the small orders used here.
EigenDecomposition jacobi_eigen(const SymMatrix& a);

// Q diag(d) Q^T with Q from a decomposition
SymMatrix reassemble(const EigenDecomposition& ed, std::span<const double> d);

// inverse through the spectral decomposition; throws on |eigenvalue| below tol
SymMatrix spd_inverse(const SymMatrix& a, double tol = 1e-13);

// C = X * S * X for symmetric S and X (result is symmetric)
SymMatrix sandwich(const SymMatrix& x, const SymMatrix& s);

// general congruence Q^T S Q where Q is a dense row-major n x n matrix
SymMatrix congruence(std::span<const double> q, const SymMatrix& s, int n);

// random rotation as a product of Givens rotations over all planes; row-major
std::vector<double> random_rotation(int n, RngStream& rs);

// random symmetric matrix with given spectrum: R diag(lam) R^T
SymMatrix random_with_spectrum(std::span<const double> lam, RngStream& rs);

} // namespace exflow
