#pragma once

// Gauss-Legendre quadrature and a log-shifted moment integrator for tilted
// densities. The shifted form returns ln(integral) plus ratios of moment
// integrals, so exponents of order +-1e5 never overflow a double.

#include <cassert>
#include <cmath>
#include <functional>
#include <vector>

#include "rldp/extended.hpp"

namespace rldp {

struct GaussLegendre {
    std::vector<double> x; // nodes on (-1, 1)
    std::vector<double> w;
};

// Nodes/weights by Newton iteration on P_n; accurate to ~1e-15 for n <= 512.
inline GaussLegendre gauss_legendre(int n) {
    GaussLegendre g;
    g.x.resize(n);
    g.w.resize(n);
    const double pi = 3.141592653589793238;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        g.x[i] = -z;
        g.x[n - 1 - i] = z;
        g.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        g.w[n - 1 - i] = g.w[i];
    }
    return g;
}

inline const GaussLegendre& gl128() {
    static const GaussLegendre g = gauss_legendre(128);
    return g;
}

// integral of f over [a, b] with a fixed GL rule.
inline double gl_integrate(const std::function<double(double)>& f, double a, double b,
                           const GaussLegendre& g = gl128()) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0;
    for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(c + h * g.x[i]);
    return s * h;
}

// Log-shifted weighted moments on [a, b]:
//   given exponent g(s) and k weight functions u_j(s) >= 0 is NOT assumed,
//   computes I_j = integral u_j(s) e^{g(s)} ds as
//   log_scale = max g over nodes, vals[j] = integral u_j e^{g - log_scale}.
// Caller reconstructs ln I_0 = log_scale + ln vals[0] and moment ratios
// vals[j]/vals[0] directly (shift cancels).
struct ShiftedMoments {
    double log_scale = 0;
    std::vector<double> vals; // shifted integrals
};

inline ShiftedMoments shifted_moments(const std::function<double(double)>& exponent,
                                      const std::vector<std::function<double(double)>>& weights,
                                      double a, double b, int panels = 3,
                                      const GaussLegendre& g = gl128()) {
    assert(b > a);
    struct NodeEval {
        double s, w, e;
    };
    std::vector<NodeEval> nodes;
    nodes.reserve(g.x.size() * panels);
    double shift = -inf;
    for (int p = 0; p < panels; ++p) {
        double pa = a + (b - a) * p / panels;
        double pb = a + (b - a) * (p + 1) / panels;
        double c = 0.5 * (pa + pb), h = 0.5 * (pb - pa);
        for (size_t i = 0; i < g.x.size(); ++i) {
            double s = c + h * g.x[i];
            double e = exponent(s);
            nodes.push_back({s, g.w[i] * h, e});
            if (e > shift) shift = e;
        }
    }
    ShiftedMoments out;
    out.log_scale = shift;
    out.vals.assign(weights.size(), 0.0);
    for (const auto& nd : nodes) {
        double ee = std::exp(nd.e - shift);
        for (size_t j = 0; j < weights.size(); ++j) out.vals[j] += nd.w * weights[j](nd.s) * ee;
    }
    return out;
}

// Adaptive Simpson on a transformed-smooth integrand; used only by the slow
//-path reward laws where no closed quadrature window applies.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 48) {
    struct Impl {
        const std::function<double(double)>& f;
        double run(double a, double m, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
            double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            double flm = f(lm), frm = f(rm);
            double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return run(a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   run(m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    } impl{f};
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return impl.run(a, m, b, fa, fm, fb, whole, tol, depth);
}

} // namespace rldp
