#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "layerstack/errors.hpp"

namespace layerstack {

inline constexpr int kMaxDim = 3;

/// Small vector with runtime dimension n in [1, 3]. Unused slots stay zero so
/// fixed-capacity loops over kMaxDim are harmless.
struct Vec {
    int n = 0;
    std::array<double, kMaxDim> a{0.0, 0.0, 0.0};

    Vec() = default;
    Vec(int dim, double x0, double x1 = 0.0, double x2 = 0.0) : n(dim), a{x0, x1, x2} {}

    static Vec zero(int dim) { return Vec(dim, 0.0, 0.0, 0.0); }
    static Vec unit(int dim, int axis) {
        Vec v = zero(dim);
        v.a[static_cast<std::size_t>(axis)] = 1.0;
        return v;
    }

    double operator[](int i) const { return a[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return a[static_cast<std::size_t>(i)]; }

    /// Primed part: components 1..n-1 as an (n-1)-vector.
    Vec primed() const {
        Vec p = zero(n - 1);
        for (int i = 1; i < n; ++i) p[i - 1] = a[static_cast<std::size_t>(i)];
        return p;
    }
    /// Rebuild (t, y') from an axial value and a primed vector.
    static Vec axial(double t, const Vec& prime) {
        Vec v = zero(prime.n + 1);
        v[0] = t;
        for (int i = 0; i < prime.n; ++i) v[i + 1] = prime[i];
        return v;
    }
};

inline Vec operator+(const Vec& x, const Vec& y) {
    Vec r = x;
    for (int i = 0; i < x.n; ++i) r[i] += y[i];
    return r;
}
inline Vec operator-(const Vec& x, const Vec& y) {
    Vec r = x;
    for (int i = 0; i < x.n; ++i) r[i] -= y[i];
    return r;
}
inline Vec operator*(double s, const Vec& x) {
    Vec r = x;
    for (int i = 0; i < x.n; ++i) r[i] *= s;
    return r;
}
inline Vec operator-(const Vec& x) { return -1.0 * x; }

inline double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (int i = 0; i < x.n; ++i) s += x[i] * y[i];
    return s;
}
inline double norm2(const Vec& x) { return dot(x, x); }
inline double norm(const Vec& x) { return std::sqrt(norm2(x)); }

inline Vec normalized(const Vec& x) {
    double m = norm(x);
    if (!(m > 0.0)) throw NotUnitVector("cannot normalize a zero vector");
    return (1.0 / m) * x;
}

/// Square matrix with runtime dimension, stored by rows.
struct Mat {
    int n = 0;
    std::array<std::array<double, kMaxDim>, kMaxDim> m{};

    static Mat identity(int dim) {
        Mat r;
        r.n = dim;
        for (int i = 0; i < dim; ++i) r.m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
        return r;
    }

    double at(int i, int j) const { return m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
    double& at(int i, int j) { return m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

    Vec row(int i) const {
        Vec r = Vec::zero(n);
        for (int j = 0; j < n; ++j) r[j] = at(i, j);
        return r;
    }
    void set_row(int i, const Vec& v) {
        for (int j = 0; j < n; ++j) at(i, j) = v[j];
    }
};

inline Mat transpose(const Mat& a) {
    Mat r;
    r.n = a.n;
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) r.at(i, j) = a.at(j, i);
    return r;
}

inline Mat mul(const Mat& a, const Mat& b) {
    Mat r;
    r.n = a.n;
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) {
            double s = 0.0;
            for (int k = 0; k < a.n; ++k) s += a.at(i, k) * b.at(k, j);
            r.at(i, j) = s;
        }
    return r;
}

/// Row-vector times matrix: y = x A.
inline Vec mul(const Vec& x, const Mat& a) {
    Vec r = Vec::zero(a.n);
    for (int j = 0; j < a.n; ++j) {
        double s = 0.0;
        for (int i = 0; i < a.n; ++i) s += x[i] * a.at(i, j);
        r[j] = s;
    }
    return r;
}

inline double det(const Mat& a) {
    if (a.n == 1) return a.at(0, 0);
    if (a.n == 2) return a.at(0, 0) * a.at(1, 1) - a.at(0, 1) * a.at(1, 0);
    return a.at(0, 0) * (a.at(1, 1) * a.at(2, 2) - a.at(1, 2) * a.at(2, 1)) -
           a.at(0, 1) * (a.at(1, 0) * a.at(2, 2) - a.at(1, 2) * a.at(2, 0)) +
           a.at(0, 2) * (a.at(1, 0) * a.at(2, 1) - a.at(1, 1) * a.at(2, 0));
}

inline double max_abs_entry(const Mat& a) {
    double r = 0.0;
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) r = std::max(r, std::abs(a.at(i, j)));
    return r;
}

}  // namespace layerstack
