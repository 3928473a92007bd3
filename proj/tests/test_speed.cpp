#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exflow/rng.hpp"
#include "exflow/speed.hpp"

#include "oracles.hpp"

#include <cmath>

using namespace exflow;

namespace {

std::vector<SpeedFunction> builtin_families(int n) {
    std::vector<SpeedFunction> fams = {
        SpeedFunction::power_mean(n, 1.0),  SpeedFunction::power_mean(n, 2.0),
        SpeedFunction::power_mean(n, -1.0), SpeedFunction::power_mean(n, 0.5),
        SpeedFunction::sigma_root(n, 1),    SpeedFunction::sigma_root(n, n),
    };
    if (n >= 2) {
        fams.push_back(SpeedFunction::sigma_root(n, 2));
        fams.push_back(SpeedFunction::sigma_ratio_root(n, 2, 1));
        fams.push_back(SpeedFunction::sigma_ratio_root(n, n, 0));
    }
    return fams;
}

std::vector<double> positive_sample(int n, RngStream& rs) {
    std::vector<double> lam(n);
    for (double& v : lam) v = rs.log_uniform(0.2, 5.0);
    return lam;
}

} // namespace

TEST_CASE("eval examples") {
    auto mean = SpeedFunction::power_mean(3, 1.0);
    CHECK(eval(mean, EigenTuple{1.0, 2.0, 3.0}) == doctest::Approx(2.0).epsilon(1e-14));

    auto s2 = SpeedFunction::sigma_root(3, 2);
    // sigma_2(1,2,3) = 2 + 3 + 6 = 11
    CHECK(eval(s2, EigenTuple{1.0, 2.0, 3.0}) == doctest::Approx(std::sqrt(11.0)).epsilon(1e-14));
}

TEST_CASE("homogeneity across families") {
    for (const auto& f : builtin_families(3)) {
        for (int trial = 0; trial < 100; ++trial) {
            RngStream rs(500, trial);
            auto lam = positive_sample(3, rs);
            double c = rs.log_uniform(0.1, 10.0);
            double base = f.value(lam);
            for (double& v : lam) v *= c;
            CHECK(std::abs(f.value(lam) - c * base) <= 1e-10 * c * base);
        }
    }
}

TEST_CASE("gradient examples and finite-difference oracle") {
    auto mean = SpeedFunction::power_mean(3, 1.0);
    auto g = grad(mean, EigenTuple{0.7, 1.3, 9.0});
    for (double v : g) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    auto s2 = SpeedFunction::sigma_root(3, 2);
    auto g2 = grad(s2, EigenTuple{1.0, 2.0, 3.0});
    double den = 2.0 * std::sqrt(11.0);
    CHECK(g2[0] == doctest::Approx(5.0 / den).epsilon(1e-12));
    CHECK(g2[1] == doctest::Approx(4.0 / den).epsilon(1e-12));
    CHECK(g2[2] == doctest::Approx(3.0 / den).epsilon(1e-12));

    for (const auto& f : builtin_families(3)) {
        auto value = [&](std::span<const double> x) { return f.value(x); };
        for (int trial = 0; trial < 100; ++trial) {
            RngStream rs(501, trial);
            auto lam = positive_sample(3, rs);
            auto analytic = f.gradient(lam);
            for (int i = 0; i < 3; ++i) {
                double fd = oracles::fd_partial(value, lam, i, 1e-6);
                CHECK(std::abs(analytic[i] - fd) <= 1e-5 * std::max(std::abs(fd), 1e-3));
            }
        }
    }
}

TEST_CASE("gradient permutation equivariance") {
    auto s2 = SpeedFunction::sigma_root(4, 2);
    std::vector<double> lam = {0.5, 1.0, 2.0, 3.5};
    auto g = s2.gradient(lam);
    std::vector<double> perm = {2.0, 0.5, 3.5, 1.0}; // indices 2,0,3,1 of lam
    auto gp = s2.gradient(perm);
    CHECK(gp[0] == doctest::Approx(g[2]).epsilon(1e-13));
    CHECK(gp[1] == doctest::Approx(g[0]).epsilon(1e-13));
    CHECK(gp[2] == doctest::Approx(g[3]).epsilon(1e-13));
    CHECK(gp[3] == doctest::Approx(g[1]).epsilon(1e-13));
}

TEST_CASE("euler relation") {
    for (const auto& f : builtin_families(4)) {
        for (int trial = 0; trial < 100; ++trial) {
            RngStream rs(502, trial);
            auto lam = positive_sample(4, rs);
            auto g = f.gradient(lam);
            double sum = 0.0;
            for (int i = 0; i < 4; ++i) sum += g[i] * lam[i];
            double fv = f.value(lam);
            CHECK(std::abs(sum - fv) <= 1e-10 * std::abs(fv));
            for (double v : g) CHECK(v > 0.0);
            CHECK(fv > 0.0);
        }
    }
}

TEST_CASE("hessian: linear family vanishes, oracle agreement, annihilates lambda") {
    auto mean = SpeedFunction::power_mean(3, 1.0);
    auto h0 = hess(mean, EigenTuple{1.0, 2.0, 3.0});
    CHECK(h0.frobenius_norm() <= 1e-14);

    for (const auto& f : builtin_families(3)) {
        auto value = [&](std::span<const double> x) { return f.value(x); };
        for (int trial = 0; trial < 100; ++trial) {
            RngStream rs(503, trial);
            auto lam = positive_sample(3, rs);
            SymMatrix h = f.hessian(lam);
            // relative to the hessian scale; second differences at step 1e-4
            // carry ~1e-7 of roundoff noise on entries of order f
            double scale = std::max({h.frobenius_norm(), f.value(lam), 1.0});
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    double fd = oracles::fd_second(value, lam, i, j, 1e-4);
                    CHECK(std::abs(h(i, j) - fd) <= 1e-5 * scale);
                }
            // 0-homogeneity of the gradient: H lambda = 0
            for (int i = 0; i < 3; ++i) {
                double dot = 0.0;
                for (int j = 0; j < 3; ++j) dot += h(i, j) * lam[j];
                CHECK(std::abs(dot) <= 1e-10 * (1.0 + h.frobenius_norm()));
            }
        }
    }
}

TEST_CASE("dual evaluation") {
    auto mean2 = SpeedFunction::power_mean(2, 1.0);
    CHECK(dual_eval(mean2, EigenTuple{1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-14));
    // harmonic mean of (1, 2) = 4/3
    CHECK(dual_eval(mean2, EigenTuple{1.0, 2.0}) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

    // sigma_n root is self-dual
    auto gauss = SpeedFunction::sigma_root(3, 3);
    for (int trial = 0; trial < 50; ++trial) {
        RngStream rs(504, trial);
        auto mu = positive_sample(3, rs);
        CHECK(gauss.dual_value(mu) == doctest::Approx(gauss.value(mu)).epsilon(1e-12));
    }

    // identity f*(mu) f(1/mu) = 1 and the double dual reproduces f
    for (const auto& f : builtin_families(3)) {
        for (int trial = 0; trial < 50; ++trial) {
            RngStream rs(505, trial);
            auto mu = positive_sample(3, rs);
            std::vector<double> rec(3);
            for (int i = 0; i < 3; ++i) rec[i] = 1.0 / mu[i];
            CHECK(std::abs(f.dual_value(mu) * f.value(rec) - 1.0) <= 1e-12);
            double back = 1.0 / f.dual_value(rec);
            CHECK(std::abs(back - f.value(mu)) <= 1e-10 * f.value(mu));
        }
    }
}

TEST_CASE("matrix lift: diagonal, rotation invariance, sqrt det") {
    auto s2 = SpeedFunction::sigma_root(2, 2);
    SymMatrix a(2);
    a.set(0, 0, 2.0);
    a.set(1, 1, 2.0);
    a.set(0, 1, 1.0);
    CHECK(matrix_eval(s2, a) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-13));

    auto f = SpeedFunction::sigma_root(3, 2);
    std::vector<double> lam = {0.5, 1.5, 4.0};
    CHECK(matrix_eval(f, SymMatrix::diagonal(lam)) ==
          doctest::Approx(f.value(lam)).epsilon(1e-13));
    for (int trial = 0; trial < 20; ++trial) {
        RngStream rs(506, trial);
        SymMatrix rot = random_with_spectrum(lam, rs);
        CHECK(matrix_eval(f, rot) == doctest::Approx(f.value(lam)).epsilon(1e-10));
    }
}

TEST_CASE("matrix gradient: diagonal case, closed form for sqrt det, equivariance") {
    auto f3 = SpeedFunction::power_mean(3, 2.0);
    std::vector<double> lam = {0.5, 1.5, 4.0};
    SymMatrix d = matrix_grad(f3, SymMatrix::diagonal(lam));
    auto g = f3.gradient(lam);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(d(i, j) - (i == j ? g[i] : 0.0)) <= 1e-13);

    auto s2 = SpeedFunction::sigma_root(2, 2);
    SymMatrix a(2);
    a.set(0, 0, 2.0);
    a.set(1, 1, 2.0);
    a.set(0, 1, 1.0);
    SymMatrix da = matrix_grad(s2, a);
    double c = 1.0 / (2.0 * std::sqrt(3.0));
    CHECK(da(0, 0) == doctest::Approx(2.0 * c).epsilon(1e-12));
    CHECK(da(0, 1) == doctest::Approx(-c).epsilon(1e-12));
    CHECK(da(1, 1) == doctest::Approx(2.0 * c).epsilon(1e-12));

    // contraction against random directions matches finite differences
    for (const auto& f : builtin_families(3)) {
        for (int trial = 0; trial < 100; ++trial) {
            RngStream rs(507, trial);
            auto spec = positive_sample(3, rs);
            SymMatrix a3 = random_with_spectrum(spec, rs);
            SymMatrix b(3);
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) b.set(i, j, rs.normal());
            double analytic = matrix_grad(f, a3).dot(b);
            double fd = oracles::fd_matrix_directional(f, a3, b, 1e-6);
            CHECK(std::abs(analytic - fd) <= 1e-5 * std::max(std::abs(fd), 1e-2));
        }
    }
}

TEST_CASE("matrix second form: zero direction, linear family, fd oracle") {
    auto f = SpeedFunction::sigma_root(3, 2);
    std::vector<double> lam = {0.5, 1.5, 4.0};
    RngStream rs0(508, 0);
    SymMatrix a = random_with_spectrum(lam, rs0);
    CHECK(matrix_second_form(f, a, SymMatrix(3)) == 0.0);

    auto lin = SpeedFunction::power_mean(3, 1.0);
    SymMatrix b(3);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) b.set(i, j, rs0.normal());
    CHECK(std::abs(matrix_second_form(lin, a, b)) <= 1e-12);

    for (const auto& fam : builtin_families(3)) {
        for (int trial = 0; trial < 50; ++trial) {
            RngStream rs(509, trial);
            auto spec = positive_sample(3, rs);
            SymMatrix a3 = random_with_spectrum(spec, rs);
            SymMatrix dir(3);
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) dir.set(i, j, rs.normal());
            double analytic = matrix_second_form(fam, a3, dir);
            double fd = oracles::fd_matrix_second(fam, a3, dir, 1e-4);
            CHECK(std::abs(analytic - fd) <= 1e-4 * std::max(std::abs(fd), 1e-1));
        }
    }
}

TEST_CASE("matrix second form handles repeated eigenvalues") {
    auto f = SpeedFunction::power_mean(3, -1.0);
    std::vector<double> lam = {2.0, 2.0, 2.0};
    SymMatrix a = SymMatrix::diagonal(lam);
    RngStream rs(510, 0);
    SymMatrix b(3);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) b.set(i, j, rs.normal());
    double analytic = matrix_second_form(f, a, b);
    double fd = oracles::fd_matrix_second(f, a, b, 1e-4);
    CHECK(std::abs(analytic - fd) <= 1e-4 * std::max(std::abs(fd), 1e-1));
}

TEST_CASE("cone membership") {
    auto pos = Cone::positive();
    CHECK(cone_contains(pos, EigenTuple{1.0, 2.0, 3.0}).inside);
    CHECK_FALSE(cone_contains(pos, EigenTuple{-0.1, 1.0, 1.0}).inside);

    auto g2 = Cone::gamma(2);
    auto res = cone_contains(g2, EigenTuple{-0.1, 1.0, 1.0});
    CHECK(res.inside);
    // sigma_1 = 1.9, sigma_2 = 0.8: slack is the smaller one
    CHECK(res.slack == doctest::Approx(0.8).epsilon(1e-14));

    auto s2 = SpeedFunction::sigma_root(3, 2);
    std::vector<double> inside_gamma2 = {-0.1, 1.0, 1.0};
    CHECK(s2.value(inside_gamma2) == doctest::Approx(std::sqrt(0.8)).epsilon(1e-13));

    std::vector<double> outside = {-2.0, 0.5, 0.5};
    CHECK_THROWS_AS(s2.value(outside), cone_error);
    auto pm = SpeedFunction::power_mean(3, -1.0);
    std::vector<double> neg = {-0.1, 1.0, 1.0};
    CHECK_THROWS_AS(pm.value(neg), cone_error);
    CHECK_THROWS_AS(pm.gradient(neg), cone_error);
}

TEST_CASE("eigen tuple stores ascending and validates") {
    EigenTuple t{3.0, 1.0, 2.0};
    CHECK(t[0] == 1.0);
    CHECK(t[2] == 3.0);
    CHECK(t.min() == 1.0);
    CHECK(t.max() == 3.0);
    CHECK_THROWS_AS(EigenTuple(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(EigenTuple({0.0, 1.0}).reciprocals(), cone_error);
}

TEST_CASE("speed function parsing") {
    auto f = SpeedFunction::parse("power_mean:r=1", 3);
    CHECK(f.family() == SpeedFamily::power_mean);
    auto g = SpeedFunction::parse("sigma_root:k=2", 3);
    CHECK(g.cone().kind == ConeKind::gamma_k);
    auto h = SpeedFunction::parse("sigma_ratio_root:k=2,l=1", 3);
    CHECK(h.name() == "sigma_ratio_root:k=2,l=1");
    CHECK_THROWS_AS(SpeedFunction::parse("nope:r=1", 3), std::invalid_argument);
    CHECK_THROWS_AS(SpeedFunction::parse("power_mean:r=0", 3), std::invalid_argument);
    CHECK_THROWS_AS(SpeedFunction::parse("sigma_ratio_root:k=1,l=2", 3), std::invalid_argument);
}
