#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exflow/modulator.hpp"

#include <cmath>
#include <vector>

using namespace exflow;

namespace {

const std::vector<const char*> kTheorem1 = {"sqrt_shift", "softplus", "logcosh_shift"};
const std::vector<const char*> kTheorem2 = {"neg_power:alpha=0.5", "neg_power:alpha=1",
                                            "neg_log_recip",       "neg_log_ratio",
                                            "neg_arctan_recip",    "shifted_exp"};

std::vector<const char*> all_builtins() {
    std::vector<const char*> v = {"identity"};
    v.insert(v.end(), kTheorem1.begin(), kTheorem1.end());
    v.insert(v.end(), kTheorem2.begin(), kTheorem2.end());
    return v;
}

} // namespace

TEST_CASE("closed-form values") {
    auto sq = Modulator::parse("sqrt_shift");
    CHECK(psi(sq, 0.75) == doctest::Approx(1.25).epsilon(1e-15)); // 3-4-5

    auto np = Modulator::parse("neg_power:alpha=1");
    CHECK(psi(np, 2.0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(dpsi(np, 2.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(ddpsi(np, 2.0) == doctest::Approx(-0.25).epsilon(1e-15));

    auto id = Modulator::identity();
    CHECK(dpsi(id, 17.3) == 1.0);
    CHECK(ddpsi(id, 17.3) == 0.0);
}

TEST_CASE("domain errors") {
    for (const char* name : {"neg_power:alpha=1", "neg_log_recip", "neg_log_ratio",
                             "neg_arctan_recip"}) {
        auto m = Modulator::parse(name);
        CHECK(m.positive_domain_only());
        CHECK_THROWS_AS(psi(m, 0.0), std::domain_error);
        CHECK_THROWS_AS(dpsi(m, -1.0), std::domain_error);
    }
    // entire families evaluate on all of R
    auto sq = Modulator::parse("sqrt_shift");
    CHECK_FALSE(sq.positive_domain_only());
    CHECK(psi(sq, -2.0) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("derivative consistency against central differences") {
    auto grid = log_grid(1e-3, 1e3, 200);
    for (const char* name : all_builtins()) {
        auto m = Modulator::parse(name);
        INFO(name);
        for (double s : grid) {
            // steps near the optima eps^(1/3) s and eps^(1/4) s; tolerances
            // relative to the natural derivative magnitudes at s
            double h1 = 6e-6 * s;
            double h2 = 1.2e-4 * s;
            double fd1 = (psi(m, s + h1) - psi(m, s - h1)) / (2.0 * h1);
            double fd2 = (psi(m, s + h2) - 2.0 * psi(m, s) + psi(m, s - h2)) / (h2 * h2);
            double scale1 = std::abs(dpsi(m, s)) + std::abs(psi(m, s)) / s;
            double scale2 =
                std::abs(ddpsi(m, s)) + std::abs(dpsi(m, s)) / s + std::abs(psi(m, s)) / (s * s);
            CHECK(std::abs(dpsi(m, s) - fd1) <= 1e-6 * scale1 + 1e-15);
            CHECK(std::abs(ddpsi(m, s) - fd2) <= 1e-6 * scale2 + 1e-15);
        }
    }
}

TEST_CASE("condition reports match the theorem lists") {
    for (const char* name : kTheorem1) {
        auto rep = check_conditions(Modulator::parse(name));
        INFO(name);
        CHECK(rep.i.holds);
        CHECK(rep.iia.holds);
        CHECK(rep.iiia.holds);
        CHECK_FALSE(rep.iib.holds);
        CHECK_FALSE(rep.iiib.holds);
    }
    for (const char* name : kTheorem2) {
        auto rep = check_conditions(Modulator::parse(name));
        INFO(name);
        CHECK(rep.i.holds);
        CHECK(rep.iib.holds);
        CHECK(rep.iiib.holds);
        CHECK(rep.iv.holds);
        CHECK_FALSE(rep.iia.holds);
        CHECK_FALSE(rep.iiia.holds);
    }
    // identity satisfies everything with equality
    auto rep = check_conditions(Modulator::identity());
    CHECK(rep.i.holds);
    CHECK(rep.iia.holds);
    CHECK(rep.iib.holds);
    CHECK(rep.iiia.holds);
    CHECK(rep.iiib.holds);
    CHECK(rep.iv.holds);
}

TEST_CASE("neg_power alpha=2 violates condition iv with an explicit witness") {
    auto m = Modulator::parse("neg_power:alpha=2");
    auto rep = check_conditions(m);
    CHECK(rep.i.holds);
    CHECK(rep.iib.holds);
    CHECK(rep.iiib.holds);
    CHECK_FALSE(rep.iv.holds);
    CHECK(rep.iv.witness_value < 0.0);
    // pointwise: psi'' s + 2 psi' = alpha(1-alpha) s^(-alpha-1) = -2 at s = 1
    CHECK(ddpsi(m, 1.0) * 1.0 + 2.0 * dpsi(m, 1.0) == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("theorem-1 builtins stay positive; theorem-2 list includes a sign-changing psi") {
    auto grid = log_grid(1e-3, 1e3, 200);
    for (const char* name : kTheorem1) {
        auto m = Modulator::parse(name);
        for (double s : grid) CHECK(psi(m, s) > 0.0);
    }
    auto se = Modulator::parse("shifted_exp");
    CHECK(psi(se, 0.01) < 0.0);
    CHECK(psi(se, 10.0) > 0.0);
}

TEST_CASE("condition iv implies monotone psi'(s) s^2 on the grid") {
    auto grid = log_grid(1e-3, 1e3, 200);
    for (const char* name : kTheorem2) {
        auto m = Modulator::parse(name);
        double prev = -std::numeric_limits<double>::infinity();
        for (double s : grid) {
            double v = dpsi(m, s) * s * s;
            CHECK(v >= prev - 1e-10 * std::max(1.0, std::abs(prev)));
            prev = v;
        }
    }
}

TEST_CASE("regime classification") {
    auto rep_id = check_conditions(Modulator::identity());
    CHECK(classify_regime(rep_id, true, true) == RegimeTag::both);

    auto rep_sq = check_conditions(Modulator::parse("sqrt_shift"));
    CHECK(classify_regime(rep_sq, true, true) == RegimeTag::convex_theorem);
    CHECK(classify_regime(rep_sq, false, true) == RegimeTag::neither);

    auto rep_np = check_conditions(Modulator::parse("neg_power:alpha=1"));
    CHECK(classify_regime(rep_np, false, true) == RegimeTag::inverse_concave_theorem);
    CHECK(classify_regime(rep_np, true, false) == RegimeTag::neither);

    auto rep_bad = check_conditions(Modulator::parse("neg_power:alpha=2"));
    CHECK(classify_regime(rep_bad, true, true) == RegimeTag::neither);
}

TEST_CASE("parsing") {
    CHECK(Modulator::parse("neg_power:alpha=0.5").alpha() == 0.5);
    CHECK(Modulator::parse("softplus").name() == "softplus");
    CHECK_THROWS_AS(Modulator::parse("unknown"), std::invalid_argument);
    CHECK_THROWS_AS(Modulator::parse("neg_power"), std::invalid_argument);
    CHECK_THROWS_AS(Modulator::make(PsiFamily::neg_power, -1.0), std::invalid_argument);
}

TEST_CASE("grid construction validates") {
    CHECK_THROWS_AS(log_grid(0.0, 1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(log_grid(1.0, 0.5, 10), std::invalid_argument);
    auto g = log_grid(1e-3, 1e3, 200);
    CHECK(g.size() == 200);
    CHECK(g.front() == doctest::Approx(1e-3));
    CHECK(g.back() == doctest::Approx(1e3));
}
