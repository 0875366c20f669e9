// Scalar minimizer, damped-Newton box maximizer, and derivative-free
// fallbacks, checked against quadratic/kinked objectives with known optima.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rldp/optimize.hpp"

using namespace rldp;
using Catch::Approx;

namespace {

// quadratic bowl CGF surrogate: Lambda(p) = 0.5 * (zeta^2 + |phi|^2)
CgfValue quadratic_bowl(const DualPoint& p) {
    CgfValue v;
    v.finite = true;
    v.value = 0.5 * (p.zeta * p.zeta + norm2(p.phi));
    v.has_grad = true;
    v.dzeta = p.zeta;
    v.dphi = p.phi;
    v.has_hess = true;
    for (int i = 0; i <= p.phi.dim; ++i) hess_at(v, i, i) = 1.0;
    return v;
}

} // namespace

TEST_CASE("scalar minimizer: smooth quadratic to high precision") {
    auto r = minimize_scalar([](double x) { return (x - 3.0) * (x - 3.0) + 1.0; }, 0.0);
    CHECK(r.bracket_ok);
    CHECK(r.x == Approx(3.0).margin(1e-8));
    CHECK(r.fx == Approx(1.0).margin(1e-12));
}

TEST_CASE("scalar minimizer: V-shaped kink is located to ~1e-9") {
    auto r = minimize_scalar([](double x) { return std::fabs(x - 2.0) + 1.0; }, -1.0);
    CHECK(r.bracket_ok);
    CHECK(r.x == Approx(2.0).margin(5e-9));
    CHECK(r.fx == Approx(1.0).margin(5e-9));
}

TEST_CASE("scalar minimizer: walks out of an infinite region to the finite valley") {
    auto f = [](double x) { return x < 1.0 ? inf : (x - 4.0) * (x - 4.0); };
    auto r = minimize_scalar(f, 0.0);
    CHECK(r.bracket_ok);
    CHECK(r.x == Approx(4.0).margin(1e-7));
}

TEST_CASE("scalar minimizer: monotone objective reports no bracket") {
    auto r = minimize_scalar([](double x) { return x; }, 0.0);
    CHECK_FALSE(r.bracket_ok);
    CHECK(r.evals <= 240);
}

TEST_CASE("chol_solve4 solves a damped SPD system and rejects an indefinite one") {
    // A = [[4,2],[2,3]], b = (1, 1); A^{-1} b = (1/8, 1/4)
    double A[16] = {0};
    A[0] = 4;
    A[1] = 2;
    A[4] = 2;
    A[5] = 3;
    double b[2] = {1, 1};
    double x[2] = {0, 0};
    REQUIRE(detail::chol_solve4(A, 0.0, b, 2, x));
    CHECK(x[0] == Approx(0.125).epsilon(1e-12));
    CHECK(x[1] == Approx(0.25).epsilon(1e-12));
    // damping shifts the diagonal: (A + I) x = b
    REQUIRE(detail::chol_solve4(A, 1.0, b, 2, x));
    CHECK(5.0 * x[0] + 2.0 * x[1] == Approx(1.0).epsilon(1e-12));
    CHECK(2.0 * x[0] + 4.0 * x[1] == Approx(1.0).epsilon(1e-12));
    double Ind[16] = {0};
    Ind[0] = 1;
    Ind[1] = 2;
    Ind[4] = 2;
    Ind[5] = 1;
    CHECK_FALSE(detail::chol_solve4(Ind, 0.0, b, 2, x));
}

TEST_CASE("concave_max: quadratic objective lands on the exact interior optimum") {
    // max qs z + qw.phi - 0.5(z^2+|phi|^2) at (qs, qw), value 0.5(qs^2+|qw|^2)
    Vec qw{0.7, -1.2};
    auto r = concave_max(quadratic_bowl, 0.3, qw);
    CHECK(r.status == MaxStatus::interior);
    CHECK(r.value == Approx(0.5 * (0.09 + 0.49 + 1.44)).epsilon(1e-10));
    CHECK(r.arg.zeta == Approx(0.3).margin(1e-8));
    CHECK(r.arg.phi[0] == Approx(0.7).margin(1e-8));
    CHECK(r.arg.phi[1] == Approx(-1.2).margin(1e-8));
    CHECK(r.grad_resid <= 1e-8);
}

TEST_CASE("concave_max: huge drift presses the whole mass onto the box edge") {
    ConcaveMaxOptions o;
    o.box_radius = 10.0;
    auto r = concave_max(quadratic_bowl, 100.0, Vec{0.0}, o);
    CHECK(r.status == MaxStatus::boundary);
    // best over |z| <= 10: 100*10 - 50 = 950
    CHECK(r.value == Approx(950.0).epsilon(1e-10));
    CHECK(r.arg.zeta == Approx(10.0));
}

TEST_CASE("concave_max: zero-curvature coordinate jumps to the edge in one budget") {
    // Lambda ignores phi: the phi direction is linear with slope qw, so the
    // supremum sits on the box edge regardless of how small qw is. A damped
    // step must not creep; it must span the box.
    auto flat_phi = [](const DualPoint& p) {
        CgfValue v;
        v.finite = true;
        v.value = 0.5 * p.zeta * p.zeta;
        v.has_grad = true;
        v.dzeta = p.zeta;
        v.dphi = zeros(p.phi.dim);
        v.has_hess = true;
        hess_at(v, 0, 0) = 1.0;
        return v;
    };
    ConcaveMaxOptions o;
    o.box_radius = 1000.0;
    for (double qw1 : {1e-8, 1e-5, 0.5}) {
        auto r = concave_max(flat_phi, 0.0, Vec{qw1}, o);
        CAPTURE(qw1);
        CHECK(r.status == MaxStatus::boundary);
        CHECK(r.arg.phi[0] == Approx(1000.0));
        CHECK(r.value == Approx(1000.0 * qw1).epsilon(1e-12));
        CHECK(r.iters < 40); // an edge jump, not a creep that eats the budget
    }
}

TEST_CASE("concave_max: warm start near the optimum converges in a few steps") {
    Vec qw{2.0};
    ConcaveMaxOptions cold;
    auto rc = concave_max(quadratic_bowl, 1.0, qw, cold);
    ConcaveMaxOptions warm;
    warm.has_start = true;
    warm.start.zeta = 1.0 - 1e-6;
    warm.start.phi = Vec{2.0 + 1e-6};
    auto rw = concave_max(quadratic_bowl, 1.0, qw, warm);
    CHECK(rw.value == Approx(rc.value).epsilon(1e-12));
    CHECK(rw.evals <= rc.evals);
    CHECK(rw.iters <= 3);
}

TEST_CASE("concave_max: warm start outside the domain falls back to the origin") {
    auto walled = [](const DualPoint& p) {
        CgfValue v;
        if (p.zeta >= 1.0) return v; // infinite beyond the wall
        v.finite = true;
        v.value = -std::log1p(-p.zeta);
        v.has_grad = true;
        v.dzeta = 1.0 / (1.0 - p.zeta);
        v.dphi = zeros(p.phi.dim);
        v.has_hess = true;
        hess_at(v, 0, 0) = v.dzeta * v.dzeta;
        hess_at(v, 1, 1) = 0.0;
        return v;
    };
    ConcaveMaxOptions o;
    o.has_start = true;
    o.start.zeta = 5.0; // infeasible
    o.start.phi = Vec{0.0};
    auto r = concave_max(walled, 0.5, Vec{0.0}, o);
    // sup of 0.5 z + ln(1-z): z* = -1, value -0.5 + ln 2... check: d/dz = 0.5 - 1/(1-z) = 0
    // => 1-z = 2 => z = -1, value = -0.5 + ln(2)
    CHECK(r.value == Approx(-0.5 + std::log(2.0)).epsilon(1e-9));
    CHECK(r.arg.zeta == Approx(-1.0).margin(1e-6));
}

TEST_CASE("concave_max: pinned coordinates are frozen and excluded from the certificate") {
    auto pinned_phi2 = [](const DualPoint& p) {
        CgfValue v;
        v.pinned[1] = true;
        if (p.phi[1] != 0.0) return v;
        v.finite = true;
        v.value = 0.5 * (p.zeta * p.zeta + p.phi[0] * p.phi[0]);
        v.has_grad = true;
        v.dzeta = p.zeta;
        v.dphi = Vec{p.phi[0], 0.0};
        v.has_hess = true;
        hess_at(v, 0, 0) = 1.0;
        hess_at(v, 1, 1) = 1.0;
        return v;
    };
    auto r = concave_max(pinned_phi2, 0.5, Vec{1.0, 123.0});
    CHECK(r.status == MaxStatus::interior);
    CHECK(r.pinned[2]); // coordinate order: zeta, phi1, phi2
    CHECK(r.arg.phi[1] == 0.0);
    CHECK(r.value == Approx(0.5 * (0.25 + 1.0)).epsilon(1e-10));
}

TEST_CASE("concave_max: domain-wall crawl respects the evaluation budget") {
    // sup of z - ln(1/(1-z)) pushes zeta toward the wall at 1 with the
    // gradient never matching; the budget must stop it.
    auto walled = [](const DualPoint& p) {
        CgfValue v;
        if (p.zeta >= 1.0) return v;
        v.finite = true;
        v.value = -2.0 * std::log1p(-p.zeta);
        v.has_grad = true;
        v.dzeta = 2.0 / (1.0 - p.zeta);
        v.dphi = zeros(p.phi.dim);
        v.has_hess = true;
        hess_at(v, 0, 0) = v.dzeta * v.dzeta / 2.0;
        return v;
    };
    ConcaveMaxOptions o;
    o.max_evals = 300;
    auto r = concave_max(walled, 10.0, Vec{0.0}, o); // sup is at the wall, infinite slope drop
    CHECK(r.evals <= 310);
    CHECK(std::isfinite(r.value));
}

TEST_CASE("nelder-mead minimizes a shifted bowl from a far seed") {
    auto r = nelder_mead(
        [](const Vec& v) {
            double dx = v[0] - 1.0, dy = v[1] + 2.0;
            return dx * dx + dy * dy;
        },
        Vec{8.0, 8.0});
    CHECK(r.fx == Approx(0.0).margin(1e-8));
    CHECK(r.x[0] == Approx(1.0).margin(1e-4));
    CHECK(r.x[1] == Approx(-2.0).margin(1e-4));
}

TEST_CASE("nelder-mead respects a projection onto the feasible half-line") {
    auto r = nelder_mead([](const Vec& v) { return (v[0] - 1.0) * (v[0] - 1.0); }, Vec{4.0},
                         [](const Vec& v) { return Vec{std::max(2.0, v[0])}; });
    CHECK(r.x[0] == Approx(2.0).margin(1e-6));
    CHECK(r.fx == Approx(1.0).margin(1e-6));
}

TEST_CASE("pattern search handles infinite plateaus") {
    auto f = [](const Vec& v) {
        if (v[0] < 0.5) return inf;
        return (v[0] - 2.0) * (v[0] - 2.0) + std::fabs(v[1]);
    };
    auto r = pattern_search(f, Vec{3.0, 1.5});
    CHECK(r.fx == Approx(0.0).margin(1e-7));
    CHECK(r.x[0] == Approx(2.0).margin(1e-4));
    CHECK(r.x[1] == Approx(0.0).margin(1e-4));
}
