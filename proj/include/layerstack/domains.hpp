#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "layerstack/errors.hpp"
#include "layerstack/frames.hpp"
#include "layerstack/vec.hpp"

namespace layerstack {

enum class Region { Interior, Exterior, BoundaryBand };

enum class Shape { HalfSpace, Ball, Ellipsoid, Blob };

/// Default classification band: root-finder residual 1e-12 plus interpolation
/// error budget.
inline constexpr double kBoundaryBand = 1e-9;

/// Closed-form level-set domain. Interior = {level < 0}. The complement flag
/// negates level and gradient, which classifies exactly opposite.
struct ImplicitDomain {
    int n = 2;
    Shape kind = Shape::Ball;
    bool complemented = false;

    // half-space: interior {x . normal > offset}, normal unit.
    Vec normal;
    double offset = 0.0;

    // ball / ellipsoid / blob.
    Vec center;
    double radius = 1.0;
    Vec semi_axes;

    // blob (n = 2): radius perturbed by amp * cos(freq * angle + phase).
    double amp = 0.0;
    int freq = 0;
    double phase = 0.0;

    static ImplicitDomain half_space(const Vec& unit_normal, double off) {
        ImplicitDomain d;
        d.n = unit_normal.n;
        d.kind = Shape::HalfSpace;
        d.normal = normalized(unit_normal);
        d.offset = off;
        return d;
    }
    static ImplicitDomain ball(const Vec& c, double rho) {
        ImplicitDomain d;
        d.n = c.n;
        d.kind = Shape::Ball;
        d.center = c;
        d.radius = rho;
        return d;
    }
    static ImplicitDomain ellipsoid(const Vec& c, const Vec& semi) {
        ImplicitDomain d;
        d.n = c.n;
        d.kind = Shape::Ellipsoid;
        d.center = c;
        d.semi_axes = semi;
        return d;
    }
    static ImplicitDomain blob(const Vec& c, double rho, double amplitude, int frequency, double phase0 = 0.0) {
        if (c.n != 2) throw InputError("blob shapes are planar only");
        ImplicitDomain d;
        d.n = 2;
        d.kind = Shape::Blob;
        d.center = c;
        d.radius = rho;
        d.amp = amplitude;
        d.freq = frequency;
        d.phase = phase0;
        return d;
    }

    double base_level(const Vec& x) const {
        switch (kind) {
            case Shape::HalfSpace:
                return offset - dot(x, normal);
            case Shape::Ball:
                return norm(x - center) - radius;
            case Shape::Ellipsoid: {
                double q = 0.0;
                for (int i = 0; i < n; ++i) {
                    double t = (x[i] - center[i]) / semi_axes[i];
                    q += t * t;
                }
                return std::sqrt(q) - 1.0;
            }
            case Shape::Blob: {
                Vec r = x - center;
                double rn = norm(r);
                double ang = std::atan2(r[1], r[0]);
                return rn - radius - amp * std::cos(freq * ang + phase);
            }
        }
        return 0.0;
    }

    Vec base_grad(const Vec& x) const {
        switch (kind) {
            case Shape::HalfSpace:
                return -normal;
            case Shape::Ball: {
                Vec r = x - center;
                double rn = norm(r);
                if (rn < 1e-300) return Vec::unit(n, 0);
                return (1.0 / rn) * r;
            }
            case Shape::Ellipsoid: {
                double q = 0.0;
                Vec g = Vec::zero(n);
                for (int i = 0; i < n; ++i) {
                    double t = (x[i] - center[i]) / semi_axes[i];
                    q += t * t;
                    g[i] = t / semi_axes[i];
                }
                double sq = std::sqrt(q);
                if (sq < 1e-300) return Vec::unit(n, 0);
                return (1.0 / sq) * g;
            }
            case Shape::Blob: {
                Vec r = x - center;
                double rn = norm(r);
                if (rn < 1e-300) return Vec::unit(n, 0);
                double ang = std::atan2(r[1], r[0]);
                Vec rhat = (1.0 / rn) * r;
                Vec phat(2, -rhat[1], rhat[0]);
                double dang = amp * freq * std::sin(freq * ang + phase);
                return rhat + (dang / rn) * phat;
            }
        }
        return Vec::unit(n, 0);
    }

    double level(const Vec& x) const {
        double s = base_level(x);
        return complemented ? -s : s;
    }
    Vec grad(const Vec& x) const {
        Vec g = base_grad(x);
        return complemented ? -g : g;
    }

    ImplicitDomain complement() const {
        ImplicitDomain d = *this;
        d.complemented = !d.complemented;
        return d;
    }

    /// The same domain in coordinates centered at q: level'(x) = level(x + q).
    ImplicitDomain recentered(const Vec& q) const {
        ImplicitDomain d = *this;
        switch (kind) {
            case Shape::HalfSpace:
                d.offset = offset - dot(q, normal);
                break;
            default:
                d.center = center - q;
                break;
        }
        return d;
    }

    /// Lower bound for |grad| near the boundary, recorded per shape.
    double min_grad_norm() const {
        switch (kind) {
            case Shape::HalfSpace:
            case Shape::Ball:
            case Shape::Blob:
                return 1.0;
            case Shape::Ellipsoid: {
                double smax = 0.0;
                for (int i = 0; i < n; ++i) smax = std::max(smax, semi_axes[i]);
                return 1.0 / smax;
            }
        }
        return 1.0;
    }

    bool bounded() const { return kind != Shape::HalfSpace && !complemented; }

    /// Axis-aligned bounding box; valid only when bounded().
    void bounding_box(Vec& lo, Vec& hi) const {
        lo = center;
        hi = center;
        double r = radius + std::abs(amp);
        for (int i = 0; i < n; ++i) {
            double ext = (kind == Shape::Ellipsoid) ? semi_axes[i] : r;
            lo[i] -= ext;
            hi[i] += ext;
        }
    }

    /// Deterministic boundary parameterization samples in ambient coordinates.
    /// Half-space tangential extent is `span` around the foot of the origin.
    std::vector<Vec> boundary_points(int count, double span = 8.0) const {
        std::vector<Vec> pts;
        pts.reserve(static_cast<std::size_t>(count));
        const double pi = 3.14159265358979323846;
        switch (kind) {
            case Shape::HalfSpace: {
                Frame f = frame_from_first_axis(normal, n);
                Vec foot = offset * normal;
                if (n == 2) {
                    for (int k = 0; k < count; ++k) {
                        double t = -span + 2.0 * span * k / (count - 1);
                        pts.push_back(foot + t * f.basis(1));
                    }
                } else {
                    int side = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(count))));
                    for (int a = 0; a < side; ++a)
                        for (int b = 0; b < side; ++b) {
                            double ta = -span + 2.0 * span * a / (side - 1);
                            double tb = -span + 2.0 * span * b / (side - 1);
                            pts.push_back(foot + ta * f.basis(1) + tb * f.basis(2));
                        }
                }
                break;
            }
            case Shape::Ball:
            case Shape::Ellipsoid:
            case Shape::Blob: {
                if (n == 2) {
                    for (int k = 0; k < count; ++k) {
                        double ang = 2.0 * pi * k / count;
                        double c = std::cos(ang), s = std::sin(ang);
                        Vec p = center;
                        if (kind == Shape::Ellipsoid) {
                            p[0] += semi_axes[0] * c;
                            p[1] += semi_axes[1] * s;
                        } else {
                            double rho = radius;
                            if (kind == Shape::Blob) rho += amp * std::cos(freq * ang + phase);
                            p[0] += rho * c;
                            p[1] += rho * s;
                        }
                        pts.push_back(p);
                    }
                } else {
                    // Fibonacci sphere.
                    double ga = pi * (3.0 - std::sqrt(5.0));
                    for (int k = 0; k < count; ++k) {
                        double z = 1.0 - 2.0 * (k + 0.5) / count;
                        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
                        double ang = ga * k;
                        Vec dir(3, r * std::cos(ang), r * std::sin(ang), z);
                        Vec p = center;
                        for (int i = 0; i < 3; ++i)
                            p[i] += (kind == Shape::Ellipsoid ? semi_axes[i] : radius) * dir[i];
                        pts.push_back(p);
                    }
                }
                break;
            }
        }
        return pts;
    }

    bool same_geometry(const ImplicitDomain& o) const {
        if (n != o.n || kind != o.kind || complemented != o.complemented) return false;
        auto eq = [](double a, double b) { return a == b; };
        switch (kind) {
            case Shape::HalfSpace:
                return eq(offset, o.offset) && norm(normal - o.normal) == 0.0;
            case Shape::Ball:
                return eq(radius, o.radius) && norm(center - o.center) == 0.0;
            case Shape::Ellipsoid:
                return norm(center - o.center) == 0.0 && norm(semi_axes - o.semi_axes) == 0.0;
            case Shape::Blob:
                return eq(radius, o.radius) && eq(amp, o.amp) && freq == o.freq && eq(phase, o.phase) &&
                       norm(center - o.center) == 0.0;
        }
        return false;
    }
};

inline Region classify_point(const ImplicitDomain& d, const Vec& p, double eps = kBoundaryBand) {
    double s = d.level(p);
    if (s < -eps) return Region::Interior;
    if (s > eps) return Region::Exterior;
    return Region::BoundaryBand;
}

/// Tensor-grid function on [-half, half]^dim with Catmull-Rom interpolation.
/// The interpolant is C^1 and its node derivatives equal central differences.
struct GridFn {
    int dim = 1;   // primed dimension, 1 or 2
    int res = 0;   // nodes per axis, odd
    double half = 0.0;
    std::vector<double> v;

    static GridFn make(int dim_, int res_, double half_) {
        if (res_ < 5 || res_ % 2 == 0) throw InputError("grid resolution must be odd and at least 5");
        GridFn g;
        g.dim = dim_;
        g.res = res_;
        g.half = half_;
        g.v.assign(static_cast<std::size_t>(dim_ == 1 ? res_ : res_ * res_), 0.0);
        return g;
    }
    static GridFn constant(int dim_, int res_, double half_, double value) {
        GridFn g = make(dim_, res_, half_);
        std::fill(g.v.begin(), g.v.end(), value);
        return g;
    }

    double h() const { return 2.0 * half / (res - 1); }
    double coord(int i) const { return (2.0 * i - (res - 1)) * half / (res - 1); }

    std::size_t idx(int i, int j = 0) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(res) * static_cast<std::size_t>(j);
    }
    double node(int i, int j = 0) const { return v[idx(i, j)]; }
    double& node(int i, int j = 0) { return v[idx(i, j)]; }

    Vec node_coords(int i, int j = 0) const {
        if (dim == 1) return Vec(1, coord(i));
        return Vec(2, coord(i), coord(j));
    }

    /// Node gradient: central differences, one-sided at the edges (this equals
    /// the interpolant's derivative at nodes, linear-ghost convention).
    Vec node_grad(int i, int j = 0) const {
        auto d1 = [this](double fm, double f0, double fp, int lo, int hi) {
            if (lo < 0) return (fp - f0) / h();
            if (hi >= res) return (f0 - fm) / h();
            return (fp - fm) / (2.0 * h());
        };
        Vec g = Vec::zero(dim);
        {
            double fm = (i - 1 >= 0) ? node(i - 1, j) : 0.0;
            double fp = (i + 1 < res) ? node(i + 1, j) : 0.0;
            g[0] = d1(fm, node(i, j), fp, i - 1, i + 1);
        }
        if (dim == 2) {
            double fm = (j - 1 >= 0) ? node(i, j - 1) : 0.0;
            double fp = (j + 1 < res) ? node(i, j + 1) : 0.0;
            g[1] = d1(fm, node(i, j), fp, j - 1, j + 1);
        }
        return g;
    }

    double value(const Vec& y) const { return eval(y, -1); }
    Vec gradient(const Vec& y) const {
        Vec g = Vec::zero(dim);
        for (int ax = 0; ax < dim; ++ax) g[ax] = eval(y, ax);
        return g;
    }

private:
    /// 1-D node fetch with linear-extrapolation ghosts.
    double ghost(int i, int) const {
        if (i < 0) return 2.0 * node(0) - node(1);
        if (i >= res) return 2.0 * node(res - 1) - node(res - 2);
        return node(i);
    }

    static double cr_value(double f0, double f1, double f2, double f3, double t) {
        return 0.5 * ((2.0 * f1) + (-f0 + f2) * t + (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) * t * t +
                      (-f0 + 3.0 * f1 - 3.0 * f2 + f3) * t * t * t);
    }
    static double cr_deriv(double f0, double f1, double f2, double f3, double t) {
        return 0.5 * ((-f0 + f2) + 2.0 * (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) * t +
                      3.0 * (-f0 + 3.0 * f1 - 3.0 * f2 + f3) * t * t);
    }

    void locate(double u, int& cell, double& t) const {
        double s = (u + half) / h();
        double c = std::floor(s);
        cell = std::clamp(static_cast<int>(c), 0, res - 2);
        t = s - cell;
    }

    /// axis = -1: value; axis = 0/1: partial derivative along that axis.
    double eval(const Vec& y, int axis) const {
        int c0;
        double t0;
        locate(y[0], c0, t0);
        if (dim == 1) {
            double f0 = ghost(c0 - 1, 0), f1 = ghost(c0, 0), f2 = ghost(c0 + 1, 0), f3 = ghost(c0 + 2, 0);
            if (axis == 0) return cr_deriv(f0, f1, f2, f3, t0) / h();
            return cr_value(f0, f1, f2, f3, t0);
        }
        int c1;
        double t1;
        locate(y[1], c1, t1);
        double rows[4];
        for (int r = 0; r < 4; ++r) {
            int j = c1 - 1 + r;
            double f0 = ghost2(c0 - 1, j), f1 = ghost2(c0, j), f2 = ghost2(c0 + 1, j), f3 = ghost2(c0 + 2, j);
            rows[r] = (axis == 0) ? cr_deriv(f0, f1, f2, f3, t0) / h() : cr_value(f0, f1, f2, f3, t0);
        }
        if (axis == 1) return cr_deriv(rows[0], rows[1], rows[2], rows[3], t1) / h();
        return cr_value(rows[0], rows[1], rows[2], rows[3], t1);
    }

    /// 2-D node fetch with linear-extrapolation ghosts on both axes.
    double ghost2(int i, int j) const {
        auto gi = [this](int k) { return std::clamp(k, 0, res - 1); };
        bool oi = (i < 0 || i >= res), oj = (j < 0 || j >= res);
        if (!oi && !oj) return node(i, j);
        if (oi && !oj) {
            if (i < 0) return 2.0 * node(0, j) - node(1, j);
            return 2.0 * node(res - 1, j) - node(res - 2, j);
        }
        if (!oi && oj) {
            if (j < 0) return 2.0 * node(i, 0) - node(i, 1);
            return 2.0 * node(i, res - 1) - node(i, res - 2);
        }
        // Corner: extrapolate along axis 0 of the extrapolated row.
        auto rowval = [this, &gi, j](int k) {
            if (j < 0) return 2.0 * node(gi(k), 0) - node(gi(k), 1);
            return 2.0 * node(gi(k), res - 1) - node(gi(k), res - 2);
        };
        if (i < 0) return 2.0 * rowval(0) - rowval(1);
        return 2.0 * rowval(res - 1) - rowval(res - 2);
    }

public:
    /// Nodes with |y'| <= half (the disk the estimates are measured on).
    std::vector<std::pair<int, int>> disk_nodes() const {
        std::vector<std::pair<int, int>> out;
        double lim2 = half * half * (1.0 + 1e-12);
        if (dim == 1) {
            for (int i = 0; i < res; ++i) out.emplace_back(i, 0);
            return out;
        }
        for (int j = 0; j < res; ++j)
            for (int i = 0; i < res; ++i) {
                double x = coord(i), y = coord(j);
                if (x * x + y * y <= lim2) out.emplace_back(i, j);
            }
        return out;
    }
};

namespace detail {

inline bool lex_less(const Vec& a, const Vec& b) {
    for (int i = 0; i < a.n; ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

/// Root of level along the segment [a, b] (level signs differ), by bisection.
inline Vec segment_root(const ImplicitDomain& d, Vec a, Vec b) {
    double fa = d.level(a);
    for (int it = 0; it < 80; ++it) {
        Vec m = 0.5 * (a + b);
        double fm = d.level(m);
        if (fm == 0.0) return m;
        if ((fa < 0.0) == (fm < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Does the boundary of d meet the open ball B_R(center)? Sampled surrogate:
/// level sign change on a coarse ball grid, or a parameterized boundary point
/// strictly inside the ball.
inline bool boundary_meets_ball(const ImplicitDomain& d, const Vec& center, double R) {
    int res = d.n == 2 ? 33 : 17;
    bool neg = false, pos = false;
    if (d.n == 2) {
        for (int j = 0; j < res; ++j)
            for (int i = 0; i < res; ++i) {
                Vec p = center + Vec(2, (2.0 * i - (res - 1)) * R / (res - 1), (2.0 * j - (res - 1)) * R / (res - 1));
                if (norm2(p - center) > R * R) continue;
                double s = d.level(p);
                if (std::abs(s) <= kBoundaryBand) return true;
                (s < 0.0 ? neg : pos) = true;
            }
    } else {
        for (int k = 0; k < res; ++k)
            for (int j = 0; j < res; ++j)
                for (int i = 0; i < res; ++i) {
                    Vec p = center + Vec(3, (2.0 * i - (res - 1)) * R / (res - 1),
                                         (2.0 * j - (res - 1)) * R / (res - 1),
                                         (2.0 * k - (res - 1)) * R / (res - 1));
                    if (norm2(p - center) > R * R) continue;
                    double s = d.level(p);
                    if (std::abs(s) <= kBoundaryBand) return true;
                    (s < 0.0 ? neg : pos) = true;
                }
    }
    if (neg && pos) return true;
    for (const Vec& b : d.boundary_points(d.n == 2 ? 1024 : 4096))
        if (norm(b - center) < R * (1.0 - 1e-12)) return true;
    return false;
}

/// Minimum-norm boundary point inside B_R(0): coarse seeding, then projected
/// Newton on the boundary. Ties are broken toward the lexicographically
/// smallest seed; any minimizer is valid downstream.
inline Vec closest_boundary_point(const ImplicitDomain& d, double R) {
    const int res = d.n == 2 ? 33 : 17;
    std::vector<Vec> cands;

    // Origin on the boundary short-circuits everything.
    if (std::abs(d.level(Vec::zero(d.n))) <= 1e-13 * std::max(1.0, R)) return Vec::zero(d.n);

    auto grid_point = [&](int i, int j, int k) {
        Vec p = Vec::zero(d.n);
        p[0] = (2.0 * i - (res - 1)) * R / (res - 1);
        p[1] = (2.0 * j - (res - 1)) * R / (res - 1);
        if (d.n == 3) p[2] = (2.0 * k - (res - 1)) * R / (res - 1);
        return p;
    };
    int kmax = d.n == 3 ? res : 1;
    for (int k = 0; k < kmax; ++k)
        for (int j = 0; j < res; ++j)
            for (int i = 0; i < res; ++i) {
                Vec p = grid_point(i, j, k);
                if (norm2(p) > R * R) continue;
                double s = d.level(p);
                if (std::abs(s) <= kBoundaryBand * std::max(1.0, R)) cands.push_back(p);
                // Axis neighbors with a sign change bracket a root.
                Vec q = p;
                for (int ax = 0; ax < d.n; ++ax) {
                    int ii = i + (ax == 0), jj = j + (ax == 1), kk = k + (ax == 2);
                    if (ii >= res || jj >= res || kk >= res) continue;
                    q = grid_point(ii, jj, kk);
                    if (norm2(q) > R * R) continue;
                    double sq = d.level(q);
                    if ((s < 0.0) != (sq < 0.0)) cands.push_back(detail::segment_root(d, p, q));
                }
            }
    for (const Vec& b : d.boundary_points(d.n == 2 ? 1024 : 4096))
        if (norm2(b) <= R * R) cands.push_back(b);
    if (cands.empty()) throw NoBoundaryInBall("no level sign change found inside the query ball");

    double bmin = norm(cands[0]);
    for (const Vec& c : cands) bmin = std::min(bmin, norm(c));
    Vec seed = cands[0];
    bool have = false;
    for (const Vec& c : cands) {
        if (norm(c) <= bmin + 1e-8 * std::max(1.0, R)) {
            if (!have || detail::lex_less(c, seed)) {
                seed = c;
                have = true;
            }
        }
    }

    // Projected Newton: project onto the boundary, then damp the tangential
    // component of x (the Lagrange condition wants x parallel to grad).
    Vec x = seed;
    auto project = [&](Vec p) {
        for (int it = 0; it < 4; ++it) {
            double s = d.level(p);
            if (std::abs(s) <= 1e-15 * std::max(1.0, R)) break;
            Vec g = d.grad(p);
            p = p - (s / norm2(g)) * g;
        }
        return p;
    };
    x = project(x);
    for (int it = 0; it < 300; ++it) {
        Vec g = normalized(d.grad(x));
        Vec tang = x - dot(x, g) * g;
        if (norm(tang) <= 1e-14 * std::max(norm(x), R)) break;
        x = project(x - tang);
    }
    return x;
}

/// Discretized boundary chart per the graph definition: psi on the 8R square
/// in a frame whose first axis is the inward normal at the anchor point.
struct LocalChart {
    Frame frame;
    Vec center;
    double R = 0.0;
    GridFn psi;
    double gamma = 1.0;
    double theta_measured = 0.0;
    double g_min = 0.0;
    Vec anchor;  // closest boundary point, in recentered coordinates
};

namespace detail {

struct ColumnSolve {
    double root = 0.0;
    bool ok = false;
};

/// Safeguarded Newton for level(from_frame((t, yp), F)) = 0 on [-span, span]:
/// bracket from a coarse sign scan, bisection fallback after non-contracting
/// steps, 200 iteration cap, residual target 1e-13.
inline double solve_column(const ImplicitDomain& d, const Frame& f, const Vec& yp, double span, double seed,
                           bool check_single_crossing) {
    auto fval = [&](double t) { return d.level(from_frame(Vec::axial(t, yp), f)); };
    auto fder = [&](double t) {
        Vec x = from_frame(Vec::axial(t, yp), f);
        return dot(d.grad(x), f.basis(0));
    };

    const int scan = 33;
    double lo = -span;
    double prev = fval(lo);
    int crossings = 0;
    double blo = 0.0, bhi = 0.0;
    for (int i = 1; i < scan; ++i) {
        double t = -span + 2.0 * span * i / (scan - 1);
        double cur = fval(t);
        if ((prev < 0.0) != (cur < 0.0)) {
            ++crossings;
            blo = -span + 2.0 * span * (i - 1) / (scan - 1);
            bhi = t;
        }
        prev = cur;
    }
    if (crossings != 1) {
        if (check_single_crossing || crossings == 0)
            throw MultipleCrossings("column crossing count = " + std::to_string(crossings) +
                                    " (domain too curved for this radius)");
    }

    double flo = fval(blo);
    double t = std::clamp(seed, blo, bhi);
    double ft = fval(t);
    int bad = 0;
    for (int it = 0; it < 200; ++it) {
        if (std::abs(ft) <= 1e-13) return t;
        // Maintain the bracket.
        if ((flo < 0.0) == (ft < 0.0)) {
            blo = t;
            flo = ft;
        } else {
            bhi = t;
        }
        double dt = fder(t);
        double tn = (dt != 0.0) ? t - ft / dt : 0.5 * (blo + bhi);
        if (!(tn > std::min(blo, bhi) && tn < std::max(blo, bhi)) || ++bad > 3) {
            tn = 0.5 * (blo + bhi);
            bad = 0;
        }
        double ftn = fval(tn);
        if (std::abs(ftn) < std::abs(ft)) bad = 0;
        t = tn;
        ft = ftn;
    }
    if (std::abs(ft) <= 1e-12) return t;
    throw NewtonStall("column solve stalled, residual " + std::to_string(ft));
}

/// Spiral order: rings of increasing Chebyshev distance from the center node.
inline std::vector<std::pair<int, int>> spiral_order(int res, int dim) {
    std::vector<std::pair<int, int>> order;
    int c = (res - 1) / 2;
    if (dim == 1) {
        order.emplace_back(c, 0);
        for (int r = 1; c - r >= 0 || c + r < res; ++r) {
            if (c - r >= 0) order.emplace_back(c - r, 0);
            if (c + r < res) order.emplace_back(c + r, 0);
            if (c - r < 0 && c + r >= res) break;
        }
        return order;
    }
    order.emplace_back(c, c);
    for (int r = 1; r <= c; ++r)
        for (int j = c - r; j <= c + r; ++j)
            for (int i = c - r; i <= c + r; ++i) {
                if (std::max(std::abs(i - c), std::abs(j - c)) != r) continue;
                if (i < 0 || j < 0 || i >= res || j >= res) continue;
                order.emplace_back(i, j);
            }
    return order;
}

}  // namespace detail

/// Chart resolution aligned with the solve grid: chart nodes with spacing
/// 2R/(grid_res-1) covering the 8R square, so B_R' solve nodes are chart
/// nodes bit for bit.
inline int chart_resolution(int grid_res) { return 8 * (grid_res - 1) + 1; }

inline LocalChart local_chart(const ImplicitDomain& dom, const Vec& center, double R, const Frame* frame_hint,
                              int grid_res) {
    ImplicitDomain d = dom.recentered(center);
    Vec xbar = closest_boundary_point(d, R);
    Frame f = frame_hint ? *frame_hint : frame_from_first_axis(normalized(-d.grad(xbar)), d.n);

    LocalChart chart;
    chart.frame = f;
    chart.center = center;
    chart.R = R;
    chart.gamma = 1.0;
    chart.g_min = d.min_grad_norm();
    chart.anchor = xbar;
    chart.psi = GridFn::make(d.n - 1, chart_resolution(grid_res), 8.0 * R);

    GridFn& psi = chart.psi;
    std::vector<char> solved(psi.v.size(), 0);
    double t0 = dot(xbar, f.basis(0));
    for (auto [i, j] : detail::spiral_order(psi.res, psi.dim)) {
        double seed = t0;
        // Nearest already-solved neighbor seeds the column.
        static constexpr std::pair<int, int> kNbr[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        for (auto [di, dj] : kNbr) {
            int ii = i + di, jj = j + dj;
            if (ii < 0 || ii >= psi.res || jj < 0 || (psi.dim == 2 && jj >= psi.res) || (psi.dim == 1 && jj != 0))
                continue;
            if (solved[psi.idx(ii, psi.dim == 2 ? jj : 0)]) {
                seed = psi.node(ii, psi.dim == 2 ? jj : 0);
                break;
            }
        }
        Vec yp = psi.node_coords(i, j);
        double root = detail::solve_column(d, f, yp, 8.0 * R, seed, true);
        psi.node(i, j) = root;
        solved[psi.idx(i, j)] = 1;
    }

    // C^{1,gamma} norm surrogate over the chart disk.
    double sup = 0.0, supg = 0.0;
    auto nodes = psi.disk_nodes();
    for (auto [i, j] : nodes) {
        sup = std::max(sup, std::abs(psi.node(i, j)));
        supg = std::max(supg, norm(psi.node_grad(i, j)));
    }
    chart.theta_measured = sup + supg;  // the Hoelder part is added by callers that know gamma
    return chart;
}

}  // namespace layerstack
