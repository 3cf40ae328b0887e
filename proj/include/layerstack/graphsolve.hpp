#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "layerstack/domains.hpp"
#include "layerstack/errors.hpp"
#include "layerstack/frames.hpp"
#include "layerstack/vec.hpp"
#include "layerstack/verify.hpp"

namespace layerstack {

enum class Orientation { UpperSet, LowerSet };

/// Re-expression problem: a source chart psi over the 8R square in its own
/// frame, to be solved as a graph over the target frame's tangent plane.
struct GraphProblem {
    const LocalChart* source = nullptr;
    Frame target;
    double R = 0.0;
    double tau = 1.0;
    double gamma = 1.0;
    double theta = 1.0;
};

/// Graph over B_R' in `frame`, with measured estimates and diagnostics.
struct SolvedGraph {
    GridFn phi;
    Frame frame;
    Orientation orientation = Orientation::UpperSet;
    double sup_grad_measured = 0.0;
    double holder_measured = 0.0;
    double residual_max = 0.0;
    double margin_min = 0.0;
    bool contained = true;
};

namespace detail {

inline Vec combine_rows(const Vec& q, const Mat& rows) {
    Vec x = Vec::zero(rows.n);
    for (int i = 0; i < rows.n; ++i) x = x + q[i] * rows.row(i);
    return x;
}

/// Column solves of x1 = psi(x') over the target grid, where x are source
/// coordinates of the target-frame point (t, y'). The target may be an
/// improper rotation (the flip route negates a frame wholesale).
inline SolvedGraph solve_graph_core(const LocalChart& src, const Mat& target_rows, double R, int grid_res,
                                    double gamma) {
    int n = src.frame.n;
    int dim = n - 1;
    const GridFn& psi = src.psi;
    // rel.row(i) = target basis vector i in source-frame coordinates.
    Mat rel = mul(target_rows, transpose(src.frame.O));

    // Axis-solvability margin on chart nodes within the guard radius: the
    // solved graph's source footprint stays inside it.
    double guard = (dim == 1 ? 1.25 : 1.55) * R;
    double margin_min = std::numeric_limits<double>::infinity();
    int margin_sign = 0;
    for (int j = 0; j < (dim == 2 ? psi.res : 1); ++j)
        for (int i = 0; i < psi.res; ++i) {
            Vec zp = psi.node_coords(i, j);
            if (norm2(zp) > guard * guard) continue;
            Vec dpsi = psi.node_grad(i, j);
            double m = rel.at(0, 0);
            for (int a = 0; a < dim; ++a) m -= rel.at(0, a + 1) * dpsi[a];
            int s = m > 0.0 ? 1 : -1;
            if (std::abs(m) < 1e-6 || (margin_sign != 0 && s != margin_sign))
                throw MarginViolation("axis-solvability margin fails at source offset (" +
                                      std::to_string(zp[0]) + (dim == 2 ? ", " + std::to_string(zp[1]) : "") +
                                      "): margin " + std::to_string(m));
            margin_sign = s;
            margin_min = std::min(margin_min, std::abs(m));
        }
    if (margin_sign == 0) throw MarginViolation("axis-solvability margin vanishes near the origin");

    SolvedGraph out;
    out.phi = GridFn::make(dim, grid_res, R);
    out.orientation = margin_sign > 0 ? Orientation::UpperSet : Orientation::LowerSet;
    out.margin_min = margin_min;

    auto axis_fn = [&](double t, const Vec& yp) {
        Vec x = combine_rows(Vec::axial(t, yp), rel);
        return x[0] - psi.value(x.primed());
    };
    auto axis_deriv = [&](double t, const Vec& yp) {
        Vec x = combine_rows(Vec::axial(t, yp), rel);
        Vec dpsi = psi.gradient(x.primed());
        double m = rel.at(0, 0);
        for (int a = 0; a < dim; ++a) m -= rel.at(0, a + 1) * dpsi[a];
        return m;
    };

    GridFn& phi = out.phi;
    std::vector<char> solved(phi.v.size(), 0);
    for (auto [i, j] : spiral_order(phi.res, dim)) {
        Vec yp = phi.node_coords(i, j);
        double tmax = std::sqrt(std::max(0.0, 64.0 * R * R - norm2(yp)));

        // Monotone-column surrogate: 32 increments of one sign, one crossing.
        const int scan = 33;
        double fprev = axis_fn(-tmax, yp);
        double mono = margin_sign > 0 ? 1.0 : -1.0;
        for (int a = 1; a < scan; ++a) {
            double t = -tmax + 2.0 * tmax * a / (scan - 1);
            double f = axis_fn(t, yp);
            if ((f - fprev) * mono < -1e-13 * R)
                throw MarginViolation("column through grid offset is not monotone");
            fprev = f;
        }

        double blo = -tmax, bhi = tmax;
        double flo = axis_fn(blo, yp), fhi = axis_fn(bhi, yp);
        if ((flo < 0.0) == (fhi < 0.0))
            throw EscapeFromBall("graph leaves the 8R ball over the grid column at (" +
                                 std::to_string(yp[0]) + (dim == 2 ? ", " + std::to_string(yp[1]) : "") + ")");

        double seed = 0.0;
        static constexpr std::pair<int, int> kNbr[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        for (auto [di, dj] : kNbr) {
            int ii = i + di, jj = j + dj;
            if (ii < 0 || ii >= phi.res || jj < 0 || (dim == 2 && jj >= phi.res) || (dim == 1 && jj != 0)) continue;
            if (solved[phi.idx(ii, dim == 2 ? jj : 0)]) {
                seed = phi.node(ii, dim == 2 ? jj : 0);
                break;
            }
        }

        double t = std::clamp(seed, blo, bhi);
        double ft = axis_fn(t, yp);
        int bad = 0;
        bool done = false;
        for (int it = 0; it < 200 && !done; ++it) {
            if (std::abs(ft) <= 1e-13) {
                done = true;
                break;
            }
            if ((flo < 0.0) == (ft < 0.0)) {
                blo = t;
                flo = ft;
            } else {
                bhi = t;
            }
            double dt = axis_deriv(t, yp);
            double tn = (dt != 0.0) ? t - ft / dt : 0.5 * (blo + bhi);
            if (!(tn > std::min(blo, bhi) && tn < std::max(blo, bhi)) || bad > 3) {
                tn = 0.5 * (blo + bhi);
                bad = 0;
            }
            double ftn = axis_fn(tn, yp);
            if (std::abs(ftn) < std::abs(ft))
                bad = 0;
            else
                ++bad;
            t = tn;
            ft = ftn;
        }
        if (!done && std::abs(ft) > 1e-12)
            throw NewtonStall("column solve stalled at residual " + std::to_string(ft));
        phi.node(i, j) = t;
        solved[phi.idx(i, j)] = 1;
    }

    double rmax = 0.0;
    for (int j = 0; j < (dim == 2 ? phi.res : 1); ++j)
        for (int i = 0; i < phi.res; ++i) rmax = std::max(rmax, std::abs(axis_fn(phi.node(i, j), phi.node_coords(i, j))));
    out.residual_max = rmax;
    out.contained = true;  // roots are bracketed inside the 8R ball by construction
    out.sup_grad_measured = sup_grad(phi);
    out.holder_measured = holder_seminorm(phi, gamma);
    return out;
}

}  // namespace detail

/// Orientation by probing the domain on both sides of a graph point along the
/// frame's first axis, for a decreasing offset sequence.
inline Orientation resolve_orientation(const ImplicitDomain& d, const SolvedGraph& g, const Frame& frame) {
    int dim = frame.n - 1;
    int c = (g.phi.res - 1) / 2;
    double phi0 = g.phi.node(c, dim == 2 ? c : 0);
    Vec p0 = from_frame(Vec::axial(phi0, Vec::zero(dim)), frame);
    if (std::abs(d.level(p0)) > 1e-8)
        throw PreconditionViolation("graph center point is not on the domain boundary");
    Vec axis = frame.basis(0);

    int verdict = 0;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
        double ea = eps * g.phi.half;
        double band = 1e-13 + 1e-3 * ea;
        double up = d.level(p0 + ea * axis);
        double dn = d.level(p0 - ea * axis);
        int v = 0;
        if (up < -band && dn > band) v = 1;
        if (up > band && dn < -band) v = -1;
        if (v == 0 || (verdict != 0 && v != verdict))
            throw AmbiguousOrientation("side probes disagree near the graph center");
        verdict = v;
    }
    return verdict > 0 ? Orientation::UpperSet : Orientation::LowerSet;
}

/// Solve the re-expression problem onto the target frame's grid.
inline SolvedGraph solve_graph(const GraphProblem& gp, int grid_res) {
    if (!gp.source) throw InputError("graph problem lacks a source chart");
    check_frame(gp.target);
    SolvedGraph g = detail::solve_graph_core(*gp.source, gp.target.O, gp.R, grid_res, gp.gamma);
    g.frame = gp.target;
    return g;
}

/// Central-block restriction of a chart to the solve grid: chart nodes and
/// solve nodes coincide bitwise, so values copy over.
inline GridFn restrict_chart(const LocalChart& chart, int grid_res) {
    if (chart.psi.res != chart_resolution(grid_res))
        throw InputError("chart resolution does not match the solve grid");
    GridFn phi = GridFn::make(chart.psi.dim, grid_res, chart.R);
    int off = 7 * (grid_res - 1) / 2;
    for (int j = 0; j < (phi.dim == 2 ? phi.res : 1); ++j)
        for (int i = 0; i < phi.res; ++i) phi.node(i, j) = chart.psi.node(i + off, phi.dim == 2 ? j + off : 0);
    return phi;
}

/// Flatten the domain around the origin: frame from the inward normal at the
/// closest boundary point, graph restricted to B_R'. The domain must already
/// be recentered on the query point.
inline std::pair<Frame, SolvedGraph> flatten_graph(const ImplicitDomain& d, double R, int grid_res, double gamma,
                                                   double theta) {
    double small = d.n * theta * std::pow(16.0 * R, gamma);
    if (small > 0.25)
        throw SmallnessViolation("smallness n*theta*(16R)^gamma = " + std::to_string(small) + " exceeds 1/4");

    LocalChart chart = local_chart(d, Vec::zero(d.n), R, nullptr, grid_res);
    SolvedGraph g;
    g.phi = restrict_chart(chart, grid_res);
    g.frame = chart.frame;
    g.margin_min = 1.0;  // identity re-expression: the axis function is t - psi
    g.contained = true;

    int dim = d.n - 1;
    int c = (g.phi.res - 1) / 2;
    double phi0 = g.phi.node(c, dim == 2 ? c : 0);
    // Closed-ball containment: a member tangent to the query sphere anchors
    // at |phi(0')| = R exactly.
    if (!(std::abs(phi0) <= R * (1.0 + 1e-9)))
        throw VerificationFailure("anchor graph value " + std::to_string(phi0) + " is not inside the ball");
    if (std::abs(d.level(Vec::zero(d.n))) <= kBoundaryBand && std::abs(phi0) > 1e-10)
        throw VerificationFailure("center lies on the boundary but the anchor value is " + std::to_string(phi0));

    // Anchor derivative, twice: interpolant route and analytic route.
    Vec dphi_grid = g.phi.node_grad(c, dim == 2 ? c : 0);
    Vec p0 = from_frame(Vec::axial(phi0, Vec::zero(dim)), chart.frame);
    Vec gr = d.grad(p0);
    double axial = dot(gr, chart.frame.basis(0));
    Vec dphi_analytic = Vec::zero(dim);
    for (int a = 0; a < dim; ++a) dphi_analytic[a] = -dot(gr, chart.frame.basis(a + 1)) / axial;
    if (norm(dphi_grid) > 1e-8 || norm(dphi_analytic) > 1e-8)
        throw VerificationFailure("anchor derivative is not flat: grid " + std::to_string(norm(dphi_grid)) +
                                  ", analytic " + std::to_string(norm(dphi_analytic)));

    double rmax = 0.0;
    for (int j = 0; j < (dim == 2 ? g.phi.res : 1); ++j)
        for (int i = 0; i < g.phi.res; ++i) {
            Vec p = from_frame(Vec::axial(g.phi.node(i, j), g.phi.node_coords(i, j)), chart.frame);
            rmax = std::max(rmax, std::abs(d.level(p)));
        }
    g.residual_max = rmax;

    g.sup_grad_measured = sup_grad(g.phi);
    g.holder_measured = holder_seminorm(g.phi, gamma);
    if (g.sup_grad_measured > 2.0 * std::sqrt(static_cast<double>(d.n)))
        throw VerificationFailure("flattened gradient bound 2*sqrt(n) fails");
    if (g.holder_measured > 18.0 * d.n * theta)
        throw VerificationFailure("flattened Hoelder bound 18*n*theta fails");

    g.orientation = resolve_orientation(d, g, chart.frame);
    if (g.orientation != Orientation::UpperSet)
        throw VerificationFailure("flattened domain is not above its graph (inward axis flipped)");
    return {chart.frame, g};
}

namespace detail {

inline void check_opposite_preconditions(const LocalChart& upper, const Vec& v1_in_ambient, double tau) {
    int n = upper.frame.n;
    double lim = tau / (8.0 * n);
    double tilt = norm(v1_in_ambient + Vec::unit(n, 0));
    if (tilt > lim)
        throw PreconditionViolation("|V_1 + e_1| = " + std::to_string(tilt) + " exceeds tau/(8n) = " +
                                    std::to_string(lim));
    int dim = n - 1;
    int c = (upper.psi.res - 1) / 2;
    double psi0 = upper.psi.node(c, dim == 2 ? c : 0);
    if (!(std::abs(psi0) < upper.R))
        throw PreconditionViolation("|psi(0')| = " + std::to_string(std::abs(psi0)) + " is not below R");
    double dpsi0 = norm(upper.psi.node_grad(c, dim == 2 ? c : 0));
    if (dpsi0 > 1e-8)
        throw PreconditionViolation("|Dpsi(0')| = " + std::to_string(dpsi0) + " exceeds 1e-8");
    double sg = sup_grad(upper.psi);
    if (sg > lim)
        throw PreconditionViolation("sup|Dpsi| = " + std::to_string(sg) + " exceeds tau/(8n) = " +
                                    std::to_string(lim));
}

inline void check_opposite_postconditions(const SolvedGraph& g, const LocalChart& upper, double tau, double gamma) {
    int n = upper.frame.n;
    double bound = 8.0 * std::sqrt(static_cast<double>(n)) * tau / (8.0 * n);
    if (g.sup_grad_measured > bound)
        throw VerificationFailure("re-expressed gradient bound 8*sqrt(n)*tau/(8n) fails");
    // Both seminorms are measured from below; 5% covers the grid-refinement
    // spread of the measurement.
    double src = holder_seminorm(upper.psi, gamma);
    if (g.holder_measured > 16.0 * src * 1.05 + 1e-12)
        throw VerificationFailure("re-expressed Hoelder bound 16*[Dpsi] fails");
}

}  // namespace detail

/// A graph {x_V^1 > psi} whose frame axis nearly opposes the ambient axis,
/// re-expressed as a lower set {y^1 < phi} in the ambient frame.
inline SolvedGraph opposite_graph(const LocalChart& upper, const Frame& ambient, double tau, double gamma,
                                  int grid_res) {
    Vec v1 = to_frame(upper.frame.basis(0), ambient);
    detail::check_opposite_preconditions(upper, v1, tau);
    SolvedGraph g = detail::solve_graph_core(upper, ambient.O, upper.R, grid_res, gamma);
    g.frame = ambient;
    if (g.orientation != Orientation::LowerSet)
        throw VerificationFailure("opposing-frame solve did not produce a lower set");
    detail::check_opposite_postconditions(g, upper, tau, gamma);
    return g;
}

/// A graph whose frame axis nearly agrees with the ambient axis, solved in the
/// axis-negated frame and reflected back: phi(y') = -phibar(-y'). Returns an
/// upper set in the ambient frame.
inline SolvedGraph flip_graph(const LocalChart& upper, const Frame& ambient, double tau, double gamma,
                              int grid_res) {
    Vec v1 = to_frame(upper.frame.basis(0), ambient);
    detail::check_opposite_preconditions(upper, -v1, tau);
    Mat neg = ambient.O;
    for (int i = 0; i < neg.n; ++i) neg.set_row(i, -neg.row(i));
    SolvedGraph bar = detail::solve_graph_core(upper, neg, upper.R, grid_res, gamma);
    if (bar.orientation != Orientation::LowerSet)
        throw VerificationFailure("flipped solve did not produce a lower set");

    SolvedGraph g = bar;
    g.frame = ambient;
    g.orientation = Orientation::UpperSet;
    int res = bar.phi.res;
    int dim = bar.phi.dim;
    for (int j = 0; j < (dim == 2 ? res : 1); ++j)
        for (int i = 0; i < res; ++i)
            g.phi.node(i, j) = -bar.phi.node(res - 1 - i, dim == 2 ? res - 1 - j : 0);
    g.sup_grad_measured = sup_grad(g.phi);
    g.holder_measured = holder_seminorm(g.phi, gamma);
    detail::check_opposite_postconditions(g, upper, tau, gamma);
    return g;
}

}  // namespace layerstack
