#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exflow/modulator.hpp"
#include "exflow/rng.hpp"
#include "exflow/structure_lab.hpp"

#include "oracles.hpp"

#include <cmath>

using namespace exflow;

TEST_CASE("convexity classifier") {
    auto lin = SpeedFunction::power_mean(3, 1.0);
    auto rep = check_convexity(lin, 500, 11);
    CHECK(rep.pass);
    CHECK(std::abs(rep.min_slack) <= 1e-11);

    auto quad = SpeedFunction::power_mean(3, 2.0);
    CHECK(check_convexity(quad, 2000, 12).pass);

    auto s2 = SpeedFunction::sigma_root(3, 2);
    auto bad = check_convexity(s2, 2000, 13);
    CHECK_FALSE(bad.pass);
    CHECK(bad.min_slack < -1e-6);
    CHECK(!bad.witness.lambda.empty());
}

TEST_CASE("inverse concavity classifiers") {
    auto harm = SpeedFunction::power_mean(3, -1.0);
    CHECK(check_inverse_concave_general(harm, 2000, 21).pass);

    auto mean = SpeedFunction::power_mean(3, 1.0);
    CHECK(check_inverse_concave_general(mean, 2000, 22).pass);

    auto gauss = SpeedFunction::sigma_root(3, 3);
    CHECK(check_inverse_concave_homog(gauss, 2000, 23).pass);

    auto bad = SpeedFunction::power_mean(2, -2.0);
    auto rep_g = check_inverse_concave_general(bad, 10000, 24);
    CHECK_FALSE(rep_g.pass);
    CHECK(!rep_g.witness.lambda.empty());
    auto rep_h = check_inverse_concave_homog(bad, 10000, 25);
    CHECK_FALSE(rep_h.pass);
}

TEST_CASE("general and 1-homogeneous criteria agree pointwise") {
    for (auto f : {SpeedFunction::power_mean(3, -1.0), SpeedFunction::power_mean(3, 1.0),
                   SpeedFunction::power_mean(2, -2.0), SpeedFunction::sigma_root(3, 3),
                   SpeedFunction::power_mean(4, 0.5)}) {
        auto rep = check_inverse_concave_homog(f, 10000, 31);
        for (const auto& [key, value] : rep.extras)
            if (key == "criterion_disagreements") CHECK(value == 0.0);
    }
}

TEST_CASE("scalar convex-regime inequality") {
    auto id = Modulator::identity();
    CHECK(scalar_psi_convex_slack(id, 1.7, 0.3) == 0.0);
    CHECK(scalar_psi_convex_slack(id, 0.2, 5.0) == 0.0);

    auto sq = Modulator::parse("sqrt_shift");
    double expected = std::sqrt(5.0) - std::sqrt(2.0) - 1.0 / std::sqrt(2.0);
    CHECK(scalar_psi_convex_slack(sq, 1.0, 2.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected > 0.0);

    for (const char* name : {"sqrt_shift", "softplus", "logcosh_shift", "identity"}) {
        auto rep = verify_scalar_psi_convex(Modulator::parse(name), 10000, 41);
        INFO(name);
        CHECK(rep.pass);
    }
}

TEST_CASE("scalar condition-iv inequality") {
    auto id = Modulator::identity();
    // identity: slack = (b-a)^2 / b
    CHECK(scalar_psi_iv_slack(id, 1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
    auto np1 = Modulator::parse("neg_power:alpha=1");
    for (double a : {0.3, 1.0, 4.2})
        for (double b : {0.7, 2.0, 9.1})
            CHECK(std::abs(scalar_psi_iv_slack(np1, a, b)) <= 1e-14 * (1.0 / a + 1.0 / b));

    for (const char* name : {"identity", "neg_power:alpha=0.5", "neg_power:alpha=1",
                             "neg_log_recip", "neg_log_ratio", "neg_arctan_recip",
                             "shifted_exp"}) {
        auto rep = verify_scalar_psi_iv(Modulator::parse(name), 10000, 42);
        INFO(name);
        CHECK(rep.pass);
    }

    // hypothesis violator: alpha = 2 breaks condition (iv) and the inequality
    auto rep_bad = verify_scalar_psi_iv(Modulator::parse("neg_power:alpha=2"), 10000, 43);
    CHECK_FALSE(rep_bad.pass);
    CHECK(rep_bad.min_slack < -1e-6);
}

TEST_CASE("interior inequality: A = B gives zero slack") {
    RngStream rs(51, 0);
    auto f = SpeedFunction::power_mean(3, -1.0);
    auto m = Modulator::parse("neg_power:alpha=1");
    std::vector<double> lam = {1.0, 2.0, 5.0};
    SymMatrix a = random_with_spectrum(lam, rs);
    double k = 0.4;
    CHECK(std::abs(interior_inequality_slack(f, m, a, a, k)) <= 1e-12);
}

TEST_CASE("interior inequality: precondition violations are hard errors") {
    auto f = SpeedFunction::power_mean(2, 1.0);
    auto m = Modulator::identity();
    std::vector<double> lam = {1.0, 2.0};
    SymMatrix a = SymMatrix::diagonal(lam);
    CHECK_THROWS_AS(interior_inequality_slack(f, m, a, a, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(interior_inequality_slack(f, m, a, a, 1.5), std::invalid_argument);
}

TEST_CASE("interior inequality: closed-form Lambda beats a centered grid") {
    auto f = SpeedFunction::power_mean(2, 1.0);
    auto m = Modulator::identity();
    for (int inst = 0; inst < 5; ++inst) {
        RngStream rs(52, inst);
        InteriorInstance in = sample_interior_instance(2, rs);
        auto lam_star = interior_optimal_lambda(in.a, in.b, in.k);
        double closed = interior_bracket(f, in.a, in.b, in.k, lam_star);

        double span = 0.0;
        for (double v : lam_star) span = std::max(span, std::abs(v));
        double grid_max = oracles::interior_bracket_grid_max(f, in.a, in.b, in.k, lam_star,
                                                             2.0 * std::max(span, 1.0), 21);
        CHECK(grid_max <= closed + 1e-10);
        CHECK(closed <= grid_max + 1e-10); // the center of the grid is the optimum

        // the optimum value equals the inverse-based bracket inside the slack
        double fa = f.matrix_value(in.a), fb = f.matrix_value(in.b);
        double slack = interior_inequality_slack(f, m, in.a, in.b, in.k);
        double via_bracket = m.psi(fb) - m.psi(fa) + m.dpsi(fa) * closed;
        CHECK(slack == doctest::Approx(via_bracket).epsilon(1e-10));
    }
}

TEST_CASE("interior inequality: sampled verification per hypothesis pair") {
    auto m_list = {Modulator::parse("neg_power:alpha=1"), Modulator::parse("neg_log_recip"),
                   Modulator::identity()};
    for (int n : {2, 3}) {
        for (auto f : {SpeedFunction::power_mean(n, 1.0), SpeedFunction::power_mean(n, -1.0),
                       SpeedFunction::sigma_root(n, n)}) {
            for (const auto& m : m_list) {
                auto rep = verify_interior_inequality(f, m, 1000, 61);
                INFO(f.name(), "+", m.name());
                CHECK(rep.pass);
            }
        }
    }
}

TEST_CASE("q is constant for A = B and monotone on samples") {
    RngStream rs(62, 0);
    auto f = SpeedFunction::power_mean(2, -1.0);
    auto m = Modulator::parse("neg_power:alpha=1");
    std::vector<double> lam = {1.5, 3.0};
    SymMatrix a = random_with_spectrum(lam, rs);
    double k = 0.7;
    std::vector<double> grid;
    for (int j = 0; j <= 100; ++j) grid.push_back(k * j / 100.0);
    double q0 = interior_q(f, m, a, a, k, 0.0);
    double qk = interior_q(f, m, a, a, k, k);
    CHECK(std::abs(q0) <= 1e-12);
    CHECK(std::abs(qk) <= 1e-12);
    CHECK(verify_q_monotone(f, m, a, a, k, grid));

    auto rep = verify_q_monotone_sampled(f, m, 300, 63);
    CHECK(rep.pass);
    auto rep2 = verify_q_monotone_sampled(SpeedFunction::sigma_root(3, 3),
                                          Modulator::parse("neg_arctan_recip"), 300, 64);
    CHECK(rep2.pass);
}

TEST_CASE("boundary form: explicit small cases") {
    auto f = SpeedFunction::power_mean(2, 1.0);
    auto m = Modulator::identity();
    EigenTuple lam{1.0, 2.0};
    SymMatrix zero(2);
    CHECK(boundary_form_value(f, m, lam, zero) == 0.0);

    SymMatrix b(2);
    b.set(1, 1, 1.0);
    // only the multiplier term survives: 2 (1/2) (1/(2-1)) 1 = 1
    CHECK(boundary_form_value(f, m, lam, b) == doctest::Approx(1.0).epsilon(1e-14));

    SymMatrix bad(2);
    bad.set(0, 0, 1.0);
    CHECK_THROWS_AS(boundary_form_value(f, m, lam, bad), std::invalid_argument);
    EigenTuple equal{1.0, 1.0};
    CHECK_THROWS_AS(boundary_form_value(f, m, equal, b), std::invalid_argument);
}

TEST_CASE("boundary form: sampled verification and random-Lambda optimality") {
    auto m_list = {Modulator::parse("neg_power:alpha=1"), Modulator::parse("shifted_exp"),
                   Modulator::identity()};
    for (int n : {2, 3}) {
        for (auto f : {SpeedFunction::power_mean(n, 1.0), SpeedFunction::power_mean(n, -1.0),
                       SpeedFunction::sigma_root(n, n)}) {
            for (const auto& m : m_list) {
                auto rep = verify_boundary_form(f, m, 1000, 71);
                INFO(f.name(), "+", m.name());
                CHECK(rep.pass);
            }
        }
    }

    // no random Lambda with vanishing first column may beat the closed form
    auto f = SpeedFunction::power_mean(3, -1.0);
    for (int inst = 0; inst < 20; ++inst) {
        RngStream rs(72, inst);
        std::vector<double> raw(3);
        raw[0] = rs.log_uniform(0.1, 1.0);
        raw[1] = raw[0] * (1.0 + rs.uniform(0.2, 1.0));
        raw[2] = raw[1] * (1.0 + rs.uniform(0.2, 1.0));
        EigenTuple lam(raw);
        SymMatrix b(3);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) b.set(i, j, rs.normal());
        b.set(0, 0, 0.0);
        auto star = boundary_optimal_lambda(lam, b);
        double best = boundary_lambda_objective(f, lam, b, star);
        for (int t = 0; t < 200; ++t) {
            std::vector<double> cand(9, 0.0);
            for (int i = 0; i < 3; ++i)
                for (int p = 1; p < 3; ++p)
                    cand[3 * i + p] = star[3 * i + p] + rs.uniform(-2.0, 2.0);
            CHECK(boundary_lambda_objective(f, lam, b, cand) <= best + 1e-10);
        }
    }
}

TEST_CASE("negative control: power_mean(-2) found non-inverse-concave quickly") {
    auto bad = SpeedFunction::power_mean(3, -2.0);
    auto rep = check_inverse_concave_general(bad, 10000, 81);
    CHECK_FALSE(rep.pass);
    auto rep_h = check_inverse_concave_homog(bad, 10000, 82);
    CHECK_FALSE(rep_h.pass);
}

TEST_CASE("negative control: condition-iv violator breaks the matrix verifiers") {
    auto bad_psi = Modulator::parse("neg_power:alpha=2");
    auto f = SpeedFunction::power_mean(2, 1.0);
    auto interior = verify_interior_inequality(f, bad_psi, 10000, 83);
    CHECK_FALSE(interior.pass);
    CHECK(interior.min_slack < -1e-6);
    auto boundary = verify_boundary_form(f, bad_psi, 10000, 84);
    CHECK_FALSE(boundary.pass);
    CHECK(boundary.min_slack < -1e-6);
}

TEST_CASE("pinching constant estimator") {
    // arithmetic mean: dual is the harmonic mean, which decays on the boundary
    auto mean = SpeedFunction::power_mean(3, 1.0);
    auto est = estimate_pinching_constant(mean, 3.0, 200000, 91);
    CHECK(est.feasible);
    CHECK(est.dual_decays_on_boundary);
    // the constraint tau_max <= C f*(tau) forces 1/tau_min <= n C
    CHECK(est.ratio_sup <= 9.0 + 1e-9);
    CHECK(est.ratio_sup > 1.5);

    // harmonic mean: dual is the arithmetic mean, which does not decay
    auto harm = SpeedFunction::power_mean(3, -1.0);
    auto est2 = estimate_pinching_constant(harm, 3.0, 100000, 92);
    CHECK_FALSE(est2.dual_decays_on_boundary);
    CHECK(est2.boundary_min_fstar > 0.2);

    // C barely feasible: only near-center rays qualify, ratio stays near 1
    auto est3 = estimate_pinching_constant(mean, 1.01, 100000, 93);
    CHECK(est3.feasible);
    CHECK(est3.ratio_sup < 1.2);

    // C below the center-ray threshold: infeasible
    auto est4 = estimate_pinching_constant(mean, 0.5, 50000, 94);
    CHECK_FALSE(est4.feasible);
}

TEST_CASE("admissibility and dual sampled checks") {
    for (auto f : {SpeedFunction::power_mean(3, 1.0), SpeedFunction::power_mean(3, -1.0),
                   SpeedFunction::sigma_root(3, 2), SpeedFunction::sigma_ratio_root(3, 2, 1)}) {
        INFO(f.name());
        CHECK(verify_admissibility(f, 500, 95).pass);
        CHECK(verify_dual(f, 500, 96).pass);
    }
}
