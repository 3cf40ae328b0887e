#pragma once

#include <cmath>

#include "layerstack/errors.hpp"
#include "layerstack/vec.hpp"

namespace layerstack {

/// Orthonormal frame with positive determinant. Rows are the basis vectors;
/// to_frame projects a point onto the rows, from_frame recombines them.
struct Frame {
    int n = 0;
    Mat O;

    static constexpr double kOrthoTol = 1e-12;
    static constexpr double kDetTol = 1e-10;

    static Frame identity(int dim) { return Frame{dim, Mat::identity(dim)}; }

    Vec basis(int i) const { return O.row(i); }
};

inline double orthonormality_defect(const Mat& a) {
    Mat g = mul(a, transpose(a));
    for (int i = 0; i < a.n; ++i) g.at(i, i) -= 1.0;
    return max_abs_entry(g);
}

inline void check_frame(const Frame& f) {
    if (orthonormality_defect(f.O) > Frame::kOrthoTol)
        throw VerificationFailure("frame rows are not orthonormal");
    if (det(f.O) < 1.0 - Frame::kDetTol)
        throw VerificationFailure("frame determinant is not +1");
}

/// Deterministic frame whose first row is v: Householder reflection taking
/// e_1 to v, then the last row negated if the determinant came out negative.
inline Frame frame_from_first_axis(const Vec& v, int n) {
    if (std::abs(norm(v) - 1.0) > 1e-12) throw NotUnitVector("first axis must be a unit vector");
    Mat O = Mat::identity(n);
    Vec u = v - Vec::unit(n, 0);
    double uu = norm2(u);
    if (uu > 1e-30) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) O.at(i, j) = (i == j ? 1.0 : 0.0) - 2.0 * u[i] * u[j] / uu;
    }
    // A reflection has det -1 unless it degenerated to the identity; flipping
    // one row restores det +1 without touching row 1 (n >= 2).
    if (det(O) < 0.0) O.set_row(n - 1, -O.row(n - 1));
    Frame f{n, O};
    check_frame(f);
    return f;
}

/// y = x O-transpose: coordinates of p in the frame (row-wise projections).
inline Vec to_frame(const Vec& p, const Frame& f) {
    Vec y = Vec::zero(f.n);
    for (int i = 0; i < f.n; ++i) y[i] = dot(p, f.O.row(i));
    return y;
}

/// x = y O: recombine frame coordinates into the ambient point.
inline Vec from_frame(const Vec& q, const Frame& f) {
    Vec x = Vec::zero(f.n);
    for (int i = 0; i < f.n; ++i) x = x + q[i] * f.O.row(i);
    return x;
}

/// O = W^T V: the frame of v expressed in w-coordinates.
inline Frame relative_frame(const Frame& w, const Frame& v) {
    if (w.n != v.n) throw InputError("relative_frame: dimension mismatch");
    Frame r{w.n, mul(v.O, transpose(w.O))};
    check_frame(r);
    return r;
}

}  // namespace layerstack
