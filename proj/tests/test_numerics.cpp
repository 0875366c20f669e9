// Extended reals, small vectors, RNG streams, quadrature, hazard blocks,
// and the statistical helpers. Oracles are closed forms evaluated in place.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>

#include "rldp/extended.hpp"
#include "rldp/quadrature.hpp"
#include "rldp/rng.hpp"
#include "rldp/special.hpp"
#include "rldp/stats.hpp"
#include "rldp/vec.hpp"

using namespace rldp;
using Catch::Approx;

TEST_CASE("extended reals: arithmetic absorbs infinities") {
    CHECK(is_finite(1.5));
    CHECK_FALSE(is_finite(inf));
    CHECK_FALSE(is_finite(-inf));
    CHECK(xadd(inf, 3.0) == inf);
    CHECK(xadd(2.0, 3.0) == Approx(5.0));
    CHECK(xmul(0.0, 7.0) == Approx(0.0));
    CHECK(xmul(2.0, inf) == inf);
    CHECK(xmul(0.0, inf) == 0.0); // convention 0 * inf = 0 (perspective at gamma=0)
}

TEST_CASE("extended reals: text round-trip keeps 17 significant digits and infinities") {
    for (double v : {0.1, -1.0 / 3.0, 1e-308, 12345.678901234567, 2.2250738585072014e-308}) {
        CAPTURE(v);
        double back = 0;
        REQUIRE(parse_real(format_real(v), back));
        CHECK(back == v);
    }
    CHECK(format_real(inf) == "+inf");
    CHECK(format_real(-inf) == "-inf");
    double pi_ = 0, ni_ = 0, junk = 0;
    CHECK(parse_real("+inf", pi_));
    CHECK(pi_ == inf);
    CHECK(parse_real("-inf", ni_));
    CHECK(ni_ == -inf);
    CHECK_FALSE(parse_real("not-a-number", junk));
    CHECK_FALSE(parse_real("", junk));
}

TEST_CASE("vectors: dot, norms, axis units") {
    Vec a{1.0, 2.0};
    Vec b{-3.0, 0.5};
    CHECK(a.dim == 2);
    CHECK(dot(a, b) == Approx(-2.0));
    CHECK(norm2(a) == Approx(5.0));
    CHECK(norm(Vec{3.0, 4.0}) == Approx(5.0));
    Vec e1 = unit(3, 1);
    CHECK(e1[0] == 0.0);
    CHECK(e1[1] == 1.0);
    CHECK(e1[2] == 0.0);
    CHECK(zeros(2).dim == 2);
    CHECK(zeros(2)[1] == 0.0);
}

TEST_CASE("cholesky factors a positive-definite matrix and rejects an indefinite one") {
    // A = [[4,2],[2,3]] = L L^T with L = [[2,0],[1,sqrt(2)]]
    double A[4] = {4, 2, 2, 3};
    LowerTri L;
    REQUIRE(cholesky(A, 2, L));
    CHECK(L.m[0] == Approx(2.0));
    CHECK(L.m[3] == Approx(1.0));
    CHECK(L.m[4] == Approx(std::sqrt(2.0)));
    // L z for z = (1,1): (2, 1 + sqrt 2)
    Vec z{1.0, 1.0};
    Vec y = tri_mul(L, z);
    CHECK(y[0] == Approx(2.0));
    CHECK(y[1] == Approx(1.0 + std::sqrt(2.0)));
    double B[4] = {1, 2, 2, 1}; // eigenvalues 3, -1
    LowerTri LB;
    CHECK_FALSE(cholesky(B, 2, LB));
}

TEST_CASE("splitmix64 and substreams: deterministic, seed-sensitive") {
    std::uint64_t s1 = 42, s2 = 42;
    CHECK(splitmix64(s1) == splitmix64(s2));
    CHECK(s1 == s2);
    // distinct substreams from one master seed
    std::set<std::uint64_t> seen;
    for (std::uint64_t j = 0; j < 64; ++j) seen.insert(substream_seed(123456789ull, j));
    CHECK(seen.size() == 64);
    CHECK(substream_seed(1, 0) != substream_seed(2, 0));
}

TEST_CASE("stream: identical seeds give identical draws, different seeds differ") {
    Stream a(777), b(777), c(778);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        std::uint64_t x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
        all_equal = all_equal && (x == y);
        any_diff = any_diff || (x != z);
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("stream: uniform draws stay inside their half-open ranges") {
    Stream st(2024);
    for (int i = 0; i < 20000; ++i) {
        double u = st.uniform_pos();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
        double v = st.uniform_open();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("stream: exponential and normal pass a 5-sigma mean test") {
    Stream st(99);
    const int n = 200000;
    double se = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        se += st.exponential(2.0); // mean 1/2, sd 1/2
        double g = st.normal();
        sn += g;
        sn2 += g * g;
    }
    double mean_e = se / n;
    CHECK(std::fabs(mean_e - 0.5) < 5.0 * 0.5 / std::sqrt((double)n));
    double mean_n = sn / n;
    CHECK(std::fabs(mean_n) < 5.0 / std::sqrt((double)n));
    double var_n = sn2 / n - mean_n * mean_n;
    CHECK(var_n == Approx(1.0).margin(0.02));
}

TEST_CASE("stream: gaussian-tail waits have survival exp(-s^2)") {
    Stream st(555);
    const int n = 200000;
    int over1 = 0, over2 = 0;
    for (int i = 0; i < n; ++i) {
        double s = st.gaussian_tail_wait();
        CHECK(s >= 0.0);
        if (s > 1.0) ++over1;
        if (s > 2.0) ++over2;
    }
    double p1 = std::exp(-1.0), p2 = std::exp(-4.0);
    CHECK(std::fabs(over1 / (double)n - p1) < 5.0 * std::sqrt(p1 * (1 - p1) / n));
    CHECK(std::fabs(over2 / (double)n - p2) < 5.0 * std::sqrt(p2 * (1 - p2) / n));
}

TEST_CASE("stream: cauchy draws have median 0 and quartiles +-1") {
    Stream st(31415);
    const int n = 200000;
    int pos = 0, above1 = 0;
    for (int i = 0; i < n; ++i) {
        double x = st.cauchy();
        if (x > 0) ++pos;
        if (x > 1) ++above1; // P = 1/4 for standard Cauchy
    }
    CHECK(std::fabs(pos / (double)n - 0.5) < 5.0 * 0.5 / std::sqrt((double)n));
    CHECK(std::fabs(above1 / (double)n - 0.25) < 5.0 * std::sqrt(0.25 * 0.75 / n));
}

TEST_CASE("gauss-legendre: exact on low-degree polynomials, 1e-14 on a gaussian") {
    auto gl8 = gauss_legendre(8);
    double cubic = gl_integrate([](double x) { return x * x * x + 2 * x; }, 0.0, 1.0, gl8);
    CHECK(cubic == Approx(0.25 + 1.0).epsilon(1e-14));
    const auto& g = gl128();
    double gauss = gl_integrate([](double s) { return std::exp(-s * s); }, 0.0, 8.0, g);
    CHECK(gauss == Approx(std::sqrt(M_PI) / 2.0).epsilon(1e-14));
}

TEST_CASE("shifted moments: log scaling is exact for an exponential exponent") {
    // integrand e^{-s}, weights {1, s} over [0, 60]: integral 1, mean 1
    std::vector<std::function<double(double)>> weights = {
        [](double) { return 1.0; }, [](double s) { return s; }};
    ShiftedMoments m =
        shifted_moments([](double s) { return -s; }, weights, 0.0, 60.0, 16);
    double i0 = std::exp(m.log_scale) * m.vals[0];
    double i1 = std::exp(m.log_scale) * m.vals[1];
    CHECK(i0 == Approx(1.0).epsilon(1e-12));
    CHECK(i1 == Approx(1.0).epsilon(1e-10));
    // an additive shift of +700 in the exponent must not overflow the result
    ShiftedMoments big =
        shifted_moments([](double s) { return 700.0 - s; }, weights, 0.0, 60.0, 16);
    CHECK(big.vals[1] / big.vals[0] == Approx(1.0).epsilon(1e-10));
    CHECK(big.log_scale + std::log(big.vals[0]) == Approx(700.0).epsilon(1e-10));
}

TEST_CASE("adaptive simpson: sin integrates to 2 over a half period") {
    double v = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-12, 40);
    CHECK(v == Approx(2.0).epsilon(1e-10));
}

TEST_CASE("phi kernels agree with their analytic definitions away from zero") {
    for (double z : {-2.0, -0.5, 0.3, 1.7}) {
        CAPTURE(z);
        CHECK(phi1(z) == Approx(std::expm1(z) / z).epsilon(1e-13));
        CHECK(phi2(z) == Approx((std::exp(z) * (z - 1) + 1) / (z * z)).epsilon(1e-13));
        CHECK(phi3(z) ==
              Approx((std::exp(z) * (z * z - 2 * z + 2) - 2) / (z * z * z)).epsilon(1e-13));
    }
    // series branch continuity at tiny arguments
    CHECK(phi1(1e-9) == Approx(1.0).epsilon(1e-9));
    CHECK(phi2(1e-9) == Approx(0.5).epsilon(1e-8));
    CHECK(phi3(1e-9) == Approx(1.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("anchored block integrals match adaptive quadrature") {
    for (int k : {0, 1, 2}) {
        for (double a : {-3.0, -0.2, 0.0}) {
            double x0 = 0.7, x1 = 2.1;
            double left = anchored_poly_exp(k, a, x0, x1, true);
            double ref = adaptive_simpson(
                [&](double s) { return std::pow(s, k) * std::exp(a * (s - x0)); }, x0, x1, 1e-13,
                40);
            CAPTURE(k, a);
            CHECK(left == Approx(ref).epsilon(1e-10));
            double right = anchored_poly_exp(k, -a, x0, x1, false);
            double ref_r = adaptive_simpson(
                [&](double s) { return std::pow(s, k) * std::exp(-a * (s - x1)); }, x0, x1, 1e-13,
                40);
            CHECK(right == Approx(ref_r).epsilon(1e-10));
        }
    }
}

TEST_CASE("piecewise hazard: construction validates its exponents") {
    CHECK_THROWS_AS(PiecewiseHazard(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseHazard(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(PiecewiseHazard(1.0, inf), std::invalid_argument);
    CHECK_NOTHROW(PiecewiseHazard(1.0, 1.0));
    CHECK_NOTHROW(PiecewiseHazard(1.0, 2.0));
}

TEST_CASE("piecewise hazard: H(s)/s oscillates between the two exponents") {
    PiecewiseHazard h(1.0, 2.0);
    CHECK(h.ell_lo() == 1.0);
    CHECK(h.ell_hi() == 2.0);
    CHECK(h.value(1.0) == Approx(1.0));   // slope ell_lo on [0,1]
    CHECK(h.value(2.0) == Approx(4.0));   // climb lands at ratio 2
    CHECK(h.value(4.0) == Approx(4.0));   // flat block, ratio back down to 1
    CHECK(h.value(8.0) == Approx(16.0));  // second climb, ratio 2 again
    CHECK(h.value(16.0) == Approx(16.0)); // flat again, ratio 1
    CHECK(h.survival(2.0) == Approx(std::exp(-4.0)));
}

TEST_CASE("piecewise hazard: inverse is the exact quantile map") {
    PiecewiseHazard h(1.0, 2.0);
    for (double hv : {0.01, 0.5, 1.0, 2.7, 4.0, 5.5, 9.0, 40.0}) {
        double s = h.inverse(hv);
        CAPTURE(hv);
        CHECK(h.value(s) == Approx(hv).epsilon(1e-12));
    }
}

TEST_CASE("degenerate hazard equals the unit-rate exponential law") {
    PiecewiseHazard h(1.0, 1.0); // H(s) = s exactly
    CHECK(h.value(3.7) == Approx(3.7));
    CHECK(h.mean_wait() == Approx(1.0).epsilon(1e-12));
    for (double zeta : {-1.0, 0.0, 0.5}) {
        auto tm = h.tilted_moments(zeta);
        REQUIRE(tm.finite);
        double m0 = 1.0 / (1.0 - zeta);
        CAPTURE(zeta);
        CHECK(tm.ln_m0 == Approx(std::log(m0)).epsilon(1e-12));
        CHECK(tm.mean == Approx(1.0 / (1.0 - zeta)).epsilon(1e-10));
        CHECK(tm.second == Approx(2.0 / ((1.0 - zeta) * (1.0 - zeta))).epsilon(1e-10));
    }
    CHECK_FALSE(h.tilted_moments(1.0).finite);
    CHECK_FALSE(h.tilted_moments(1.5).finite);
}

TEST_CASE("oscillating hazard: tilts are finite strictly below the lower exponent") {
    PiecewiseHazard h(1.0, 2.0);
    CHECK(h.tilted_moments(0.97).finite);
    CHECK_FALSE(h.tilted_moments(1.0).finite);
    // the mean from tilted moments at zero matches direct quadrature of survival
    double mean_quad = adaptive_simpson([&](double s) { return h.survival(s); }, 0.0, 60.0, 1e-12, 44);
    CHECK(h.mean_wait() == Approx(mean_quad).epsilon(1e-9));
}

TEST_CASE("clopper-pearson: exact endpoints and coverage shape") {
    auto all = clopper_pearson(100, 100, 0.99);
    CHECK(all.hi == 1.0);
    CHECK(all.lo == Approx(std::pow(0.005, 1.0 / 100.0)).epsilon(1e-10));
    auto none = clopper_pearson(0, 100, 0.99);
    CHECK(none.lo == 0.0);
    CHECK(none.hi == Approx(1.0 - std::pow(0.005, 1.0 / 100.0)).epsilon(1e-10));
    auto mid = clopper_pearson(50, 100, 0.99);
    CHECK(mid.lo < 0.5);
    CHECK(mid.hi > 0.5);
    CHECK(mid.lo > 0.3);
    CHECK(mid.hi < 0.7);
    // wider confidence -> wider interval
    auto mid95 = clopper_pearson(50, 100, 0.95);
    CHECK(mid95.lo > mid.lo);
    CHECK(mid95.hi < mid.hi);
    CHECK_THROWS_AS(clopper_pearson(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(clopper_pearson(5, 4), std::invalid_argument);
}

TEST_CASE("distribution helpers match direct summation and symmetry") {
    CHECK(normal_cdf(0.0) == Approx(0.5));
    CHECK(normal_cdf(1.0) + normal_cdf(-1.0) == Approx(1.0).epsilon(1e-12));
    CHECK(normal_cdf(1.96) == Approx(0.9750021048517795).epsilon(1e-10));
    // Poisson CDF vs direct sum at mean 20
    double mean = 20.0;
    double direct = 0, term = std::exp(-mean);
    for (int k = 0; k <= 25; ++k) {
        direct += term;
        term *= mean / (k + 1);
    }
    CHECK(poisson_cdf(25, mean) == Approx(direct).epsilon(1e-12));
    // Gamma(1, rate) is exponential
    CHECK(gamma_cdf(2.0, 1.0, 1.5) == Approx(1.0 - std::exp(-3.0)).epsilon(1e-12));
    // Gamma(n, 1) at its mean is near but below 1/2 + monotone in x
    CHECK(gamma_cdf(5.0, 5.0, 1.0) == Approx(0.5595067149347875).epsilon(1e-10));
    CHECK(gamma_cdf(0.0, 2.0, 1.0) == 0.0);
}
