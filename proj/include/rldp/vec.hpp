#pragma once

// Fixed-capacity vector for reward values and spatial points, dim <= 3.
// Value type, no allocation: these sit in the hot Monte Carlo loops.

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>

namespace rldp {

inline constexpr int max_dim = 3;

struct Vec {
    std::array<double, max_dim> a{0.0, 0.0, 0.0};
    int dim = 0;

    Vec() = default;
    explicit Vec(int d) : dim(d) { assert(d >= 0 && d <= max_dim); }
    Vec(std::initializer_list<double> xs) {
        assert(xs.size() <= max_dim);
        dim = static_cast<int>(xs.size());
        int i = 0;
        for (double v : xs) a[i++] = v;
    }

    double& operator[](int i) { assert(i >= 0 && i < dim); return a[i]; }
    double operator[](int i) const { assert(i >= 0 && i < dim); return a[i]; }

    Vec& operator+=(const Vec& o) {
        assert(dim == o.dim);
        for (int i = 0; i < dim; ++i) a[i] += o.a[i];
        return *this;
    }
    Vec& operator*=(double c) {
        for (int i = 0; i < dim; ++i) a[i] *= c;
        return *this;
    }

    friend Vec operator+(Vec x, const Vec& y) { return x += y; }
    friend Vec operator-(Vec x, const Vec& y) {
        assert(x.dim == y.dim);
        for (int i = 0; i < x.dim; ++i) x.a[i] -= y.a[i];
        return x;
    }
    friend Vec operator*(double c, Vec x) { return x *= c; }
    friend Vec operator/(Vec x, double c) { return x *= (1.0 / c); }

    friend bool operator==(const Vec& x, const Vec& y) {
        if (x.dim != y.dim) return false;
        for (int i = 0; i < x.dim; ++i)
            if (x.a[i] != y.a[i]) return false;
        return true;
    }
};

inline double dot(const Vec& x, const Vec& y) {
    assert(x.dim == y.dim);
    double s = 0;
    for (int i = 0; i < x.dim; ++i) s += x.a[i] * y.a[i];
    return s;
}

inline double norm2(const Vec& x) { return dot(x, x); }
inline double norm(const Vec& x) { return std::sqrt(norm2(x)); }

inline Vec zeros(int d) { return Vec(d); }

inline Vec unit(int d, int axis) {
    Vec e(d);
    e[axis] = 1.0;
    return e;
}

// Lower-triangular d x d matrix; used for covariance Cholesky factors.
struct LowerTri {
    std::array<double, max_dim * max_dim> m{};
    int dim = 0;
    double& at(int r, int c) { return m[r * max_dim + c]; }
    double at(int r, int c) const { return m[r * max_dim + c]; }
};

// Cholesky of a symmetric matrix given row-major; returns false when the
// matrix is not (numerically) positive definite.
inline bool cholesky(const double* sym, int d, LowerTri& out) {
    out = LowerTri{};
    out.dim = d;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = sym[i * d + j];
            for (int k = 0; k < j; ++k) s -= out.at(i, k) * out.at(j, k);
            if (i == j) {
                if (s <= 0.0) return false;
                out.at(i, i) = std::sqrt(s);
            } else {
                out.at(i, j) = s / out.at(j, j);
            }
        }
    }
    return true;
}

inline Vec tri_mul(const LowerTri& L, const Vec& z) {
    Vec r(L.dim);
    for (int i = 0; i < L.dim; ++i) {
        double s = 0;
        for (int j = 0; j <= i; ++j) s += L.at(i, j) * z[j];
        r[i] = s;
    }
    return r;
}

} // namespace rldp
