// Monte Carlo layer: trajectory simulation, hit-probability estimation with
// exact binomial intervals, pair-mean estimation, and the decay-rate curve.
// Distributional checks are pinned against exact Poisson and Gamma oracles.
#include <catch2/catch_test_macros.hpp>
#include <catch2/catch_approx.hpp>

#include "rldp/laws.hpp"
#include "rldp/mc.hpp"
#include "rldp/numerics.hpp"
#include "rldp/sets.hpp"
#include "rldp/stats.hpp"

#include <cmath>
#include <stdexcept>

using namespace rldp;
using Catch::Approx;

TEST_CASE("trajectory bookkeeping is consistent") {
    PairLaw law = make_exp_unit(1.0);
    Stream st(123);
    for (int rep = 0; rep < 50; ++rep) {
        Trajectory tr = simulate_trajectory(law, 10.0, st);
        CHECK(tr.t == 10.0);
        // Unit reward per event: accumulated reward equals the renewal count.
        REQUIRE(tr.w.dim == 1);
        CHECK(tr.w[0] == static_cast<double>(tr.n));
        CHECK(tr.t_last <= 10.0);
        CHECK(tr.t_next > 10.0);
        if (tr.n > 0) CHECK(tr.t_last > 0.0);
    }
}

TEST_CASE("trajectory rejects bad horizons and enforces the step guard") {
    PairLaw law = make_exp_unit(1.0);
    Stream st(1);
    CHECK_THROWS_AS(simulate_trajectory(law, 0.0, st), std::invalid_argument);
    CHECK_THROWS_AS(simulate_trajectory(law, -1.0, st), std::invalid_argument);
    CHECK_THROWS_AS(simulate_trajectory(law, inf, st), std::invalid_argument);
    // A horizon of 1e6 needs ~1e6 unit-mean waits; a guard of 100 must trip.
    CHECK_THROWS_AS(simulate_trajectory(law, 1e6, st, 100), std::runtime_error);
}

TEST_CASE("hit probability matches the exact Poisson point mass") {
    // For unit-rate exponential waits with unit rewards, W_t = N_t (the
    // Poisson count). The ball of radius 0.025 around 1 at t = 20 selects
    // exactly { N_20 = 20 }, whose probability is the Poisson pmf at 20.
    PairLaw law = make_exp_unit(1.0);
    auto ball = make_closed_ball(Vec{1.0}, 0.025);
    const double p_exact = poisson_cdf(20, 20.0) - poisson_cdf(19, 20.0);
    REQUIRE(p_exact == Approx(0.08883531739208521).epsilon(1e-10));

    auto est = estimate_prob(law, 20.0, ball, 200000, 20240818, 2);
    CHECK(est.n_runs == 200000);
    CHECK(est.hits > 0);
    // 99% interval must cover the exact value.
    CHECK(est.ci_lo <= p_exact);
    CHECK(est.ci_hi >= p_exact);
    CHECK(est.p_hat == Approx(p_exact).margin(0.005));
}

TEST_CASE("hit counting is deterministic and chunk-invariant across workers") {
    PairLaw law = make_exp_unit(1.0);
    auto ball = make_closed_ball(Vec{1.0}, 0.1);
    auto a = estimate_prob(law, 15.0, ball, 20000, 99, 1);
    auto b = estimate_prob(law, 15.0, ball, 20000, 99, 3);
    auto c = estimate_prob(law, 15.0, ball, 20000, 99, 8);
    CHECK(a.hits == b.hits);
    CHECK(b.hits == c.hits);

    auto again = estimate_prob(law, 15.0, ball, 20000, 99, 4);
    CHECK(again.hits == a.hits);

    auto other_seed = estimate_prob(law, 15.0, ball, 20000, 100, 1);
    CHECK(other_seed.hits != a.hits); // seeds steer the runs
}

TEST_CASE("pair-mean probability matches the exact Gamma interval") {
    // With unit rewards the reward box is always satisfied, so the event is
    // T_5 / 5 in [0.8, 1.2], i.e. a Gamma(5, 1) variable landing in [4, 6].
    PairLaw law = make_exp_unit(1.0);
    auto box = make_box_product(0.8, 1.2, Vec{0.99}, Vec{1.01});
    const double p_exact = gamma_cdf(6.0, 5.0, 1.0) - gamma_cdf(4.0, 5.0, 1.0);

    auto est = estimate_pair_mean_prob(law, 5, box, 200000, 77, 2);
    CHECK(est.ci_lo <= p_exact);
    CHECK(est.ci_hi >= p_exact);
    CHECK(est.p_hat == Approx(p_exact).margin(0.005));

    auto one = estimate_pair_mean_prob(law, 5, box, 20000, 7, 1);
    auto four = estimate_pair_mean_prob(law, 5, box, 20000, 7, 4);
    CHECK(one.hits == four.hits);
}

TEST_CASE("zero-hit estimates keep only the one-sided rate bound") {
    // { N_50 = 150 } has probability ~exp(-65): certainly unseen in 1000
    // runs. The rate point must report no point rate and no upper rate, but
    // still a finite positive lower rate from the interval's upper end.
    PairLaw law = make_exp_unit(1.0);
    auto ball = make_closed_ball(Vec{3.0}, 0.01);
    auto curve = empirical_rate_curve(law, ball, {50.0}, 1000, 5);
    REQUIRE(curve.size() == 1);
    const RatePoint& rp = curve[0];
    CHECK(rp.est.hits == 0);
    CHECK(rp.est.p_hat == 0.0);
    CHECK(rp.est.ci_lo == 0.0);
    CHECK(rp.est.ci_hi == Approx(1.0 - std::pow(0.005, 1.0 / 1000.0)).epsilon(1e-12));
    CHECK_FALSE(rp.has_rate);
    CHECK_FALSE(rp.has_rate_hi);
    CHECK(rp.rate_lo > 0.0);
    CHECK(std::isfinite(rp.rate_lo));
}

TEST_CASE("rate points derive from the estimate by the log transform") {
    PairLaw law = make_exp_unit(1.0);
    auto ball = make_closed_ball(Vec{1.0}, 0.2);
    auto curve = empirical_rate_curve(law, ball, {5.0, 10.0}, 20000, 31);
    REQUIRE(curve.size() == 2);
    for (const RatePoint& rp : curve) {
        REQUIRE(rp.est.hits > 0);
        REQUIRE(rp.has_rate);
        CHECK(rp.rate == Approx(-std::log(rp.est.p_hat) / rp.t).epsilon(1e-12));
        CHECK(rp.rate_lo == Approx(-std::log(rp.est.ci_hi) / rp.t).epsilon(1e-12));
        REQUIRE(rp.has_rate_hi);
        CHECK(rp.rate_hi == Approx(-std::log(rp.est.ci_lo) / rp.t).epsilon(1e-12));
        CHECK(rp.rate_lo <= rp.rate);
        CHECK(rp.rate <= rp.rate_hi);
    }
}

TEST_CASE("rate-curve grid points draw independent substreams") {
    PairLaw law = make_exp_unit(1.0);
    auto ball = make_closed_ball(Vec{1.0}, 0.2);
    // Same horizon twice: the two grid slots use substreams 0 and 1 of the
    // batch seed, so they are reproducible individually and differ from
    // each other.
    auto curve = empirical_rate_curve(law, ball, {5.0, 5.0}, 5000, 42);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].est.hits != curve[1].est.hits);

    auto direct0 = estimate_prob(law, 5.0, ball, 5000, substream_seed(42, 0));
    auto direct1 = estimate_prob(law, 5.0, ball, 5000, substream_seed(42, 1));
    CHECK(curve[0].est.hits == direct0.hits);
    CHECK(curve[1].est.hits == direct1.hits);
}

TEST_CASE("estimators validate their inputs") {
    PairLaw law = make_exp_unit(1.0);
    auto ball = make_closed_ball(Vec{1.0}, 0.1);
    auto box = make_box_product(0.8, 1.2, Vec{0.99}, Vec{1.01});

    CHECK_THROWS_AS(estimate_prob(law, 10.0, ball, 99, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_prob(law, 10.0, box, 1000, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_prob(law, 10.0, ball, 1000, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(estimate_pair_mean_prob(law, 5, ball, 1000, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_pair_mean_prob(law, 0, box, 1000, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_pair_mean_prob(law, 5, box, 99, 1), std::invalid_argument);
}

TEST_CASE("step guard propagates through the estimator") {
    PairLaw law = make_exp_unit(1.0);
    auto ball = make_closed_ball(Vec{1.0}, 0.1);
    CHECK_THROWS_AS(estimate_prob(law, 1e6, ball, 100, 1, 1, 100), std::runtime_error);
}
