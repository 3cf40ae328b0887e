#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "layerstack/domains.hpp"
#include "layerstack/errors.hpp"
#include "layerstack/frames.hpp"
#include "layerstack/parallel.hpp"
#include "layerstack/vec.hpp"

namespace layerstack {

/// Regularity and smallness budget for one scene.
struct HolderBudget {
    int n = 2;
    double gamma = 1.0;
    double theta = 1.0;
    double tau = 1.0;
    double delta = 0.125;
    double delta_1 = 1.0 / 32.0;

    void validate() const {
        if (n < 2 || n > kMaxDim) throw InputError("dimension must be 2 or 3");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw InputError("gamma must lie in (0,1]");
        if (!(theta > 0.0)) throw InputError("theta must be positive");
        if (!(tau > 0.0 && tau <= 1.0)) throw InputError("tau must lie in (0,1]");
        if (!(delta > 0.0 && delta <= 0.125)) throw InputError("delta must lie in (0,1/8]");
        if (!(delta_1 > 0.0 && delta_1 < 1.0 / 16.0)) throw InputError("delta_1 must lie in (0,1/16)");
    }
};

/// Admissible radii, largest first. Each rung is the exact closed-form
/// inversion of its smallness inequality, clamped by the rung above.
struct RadiusLadder {
    double R_star = 0.0;  // n theta (16R)^gamma <= 1/4, capped at 1
    double R_1 = 0.0;     // 18 n theta (8R)^gamma <= tau
    double R_2 = 0.0;     // 36 n theta (4R)^gamma <= delta
    double R_3 = 0.0;     // R_2 evaluated at delta_1, divided by 10
    double R_4 = 0.0;     // 18 n theta (8R)^gamma <= tau/(8n)
    double R_0 = 0.0;     // final admissible radius
};

inline RadiusLadder radius_ladder(const HolderBudget& b) {
    b.validate();
    double n = b.n, th = b.theta, g = b.gamma;
    auto inv = [&](double bound, double scale) {
        // Largest R with n*theta*(scale*R)^gamma <= bound.
        return std::pow(bound / (n * th), 1.0 / g) / scale;
    };
    RadiusLadder L;
    L.R_star = std::min(1.0, inv(0.25, 16.0));
    auto r1 = [&](double t) { return std::min(L.R_star, inv(t / 18.0, 8.0)); };
    auto r2 = [&](double dd) { return std::min(r1(b.tau), inv(dd / 36.0, 4.0)); };
    L.R_1 = r1(b.tau);
    L.R_2 = r2(b.delta);
    L.R_3 = std::min(L.R_2, r2(b.delta_1) / 10.0);
    L.R_4 = std::min(L.R_3, inv(b.tau / (18.0 * 8.0 * n), 8.0));
    L.R_0 = L.R_4;
    return L;
}

/// sup |Dg| over the grid's disk nodes (interpolant node derivatives).
inline double sup_grad(const GridFn& g) {
    double s = 0.0;
    for (auto [i, j] : g.disk_nodes()) s = std::max(s, norm(g.node_grad(i, j)));
    return s;
}

/// Hoelder seminorm of Dg over disk-node pairs at least 2 cells apart,
/// approximated from below. Node sets larger than max_nodes are thinned by a
/// deterministic stride so the pair loop stays tractable.
inline double holder_seminorm(const GridFn& g, double gamma, int max_nodes = 2048) {
    auto nodes = g.disk_nodes();
    if (static_cast<int>(nodes.size()) > max_nodes) {
        int stride = static_cast<int>((nodes.size() + max_nodes - 1) / max_nodes);
        std::vector<std::pair<int, int>> thin;
        for (std::size_t k = 0; k < nodes.size(); k += static_cast<std::size_t>(stride)) thin.push_back(nodes[k]);
        nodes.swap(thin);
    }
    const std::size_t count = nodes.size();
    if (count < 2) return 0.0;

    std::vector<Vec> grads(count);
    for (std::size_t k = 0; k < count; ++k) grads[k] = g.node_grad(nodes[k].first, nodes[k].second);

    // Distances are h*sqrt(di^2+dj^2) with integer di, dj: one pow per
    // distinct squared offset.
    int span = g.res - 1;
    std::vector<double> powtab(static_cast<std::size_t>(2 * span * span + 1), 0.0);
    double h = g.h();
    for (std::size_t k = 4; k < powtab.size(); ++k) powtab[k] = std::pow(h * h * static_cast<double>(k), gamma * 0.5);

    std::vector<double> best(worker_count(), 0.0);
    parallel_for(count, [&](std::size_t lo, std::size_t hi, std::size_t worker) {
        double b = 0.0;
        for (std::size_t a = lo; a < hi; ++a)
            for (std::size_t c = a + 1; c < count; ++c) {
                int di = nodes[a].first - nodes[c].first;
                int dj = nodes[a].second - nodes[c].second;
                int k = di * di + dj * dj;
                if (k < 4) continue;  // closer than 2 cells: interpolation noise dominates
                double diff = norm(grads[a] - grads[c]);
                b = std::max(b, diff / powtab[static_cast<std::size_t>(k)]);
            }
        best[worker] = std::max(best[worker], b);
    });
    return *std::max_element(best.begin(), best.end());
}

/// C^{1,gamma} norm surrogate of a chart: sup|psi| + sup|Dpsi| + [Dpsi]_gamma
/// over the chart's disk nodes.
inline double chart_holder_norm(const GridFn& psi, double gamma) {
    double sup = 0.0;
    for (auto [i, j] : psi.disk_nodes()) sup = std::max(sup, std::abs(psi.node(i, j)));
    return sup + sup_grad(psi) + holder_seminorm(psi, gamma);
}

/// Largest measured chart norm over sampled boundary points: certifies a
/// shape against the budget theta at probe scale R_probe.
inline double measure_theta(const ImplicitDomain& d, double R_probe, double gamma, int grid_res = 9,
                            int samples = 12) {
    double worst = 0.0;
    for (const Vec& y : d.boundary_points(samples)) {
        LocalChart chart = local_chart(d, y, R_probe, nullptr, grid_res);
        worst = std::max(worst, chart_holder_norm(chart.psi, gamma));
    }
    return worst;
}

struct ReifenbergReport {
    double delta = 0.0;
    double delta_hat = 0.0;
    bool pass = false;
    int samples = 0;
    int scales = 0;
    double worst_scale = 0.0;
    Vec worst_point;
};

/// Measured two-sided slab thickness: for each sampled boundary point and
/// dyadic scale, the boundary height along the inward normal is root-solved
/// per tangential offset of the cylinder, and interior/exterior samples are
/// classified as a cross-check. delta_hat is the worst |height|/r.
inline ReifenbergReport reifenberg_check(const ImplicitDomain& d, double delta, double R, int boundary_samples = 16,
                                         int scales = 4) {
    ReifenbergReport rep;
    rep.delta = delta;
    rep.samples = boundary_samples;
    rep.scales = scales;

    auto pts = d.boundary_points(boundary_samples);
    const int tan_res = 33;
    const int ax_res = 65;
    for (const Vec& y : pts) {
        Vec gy = d.grad(y);
        Frame f = frame_from_first_axis(normalized(-gy), d.n);
        for (int si = 0; si < scales; ++si) {
            double r = R / std::pow(2.0, si);
            auto column_height = [&](const Vec& zp) {
                // Worst |t| over level roots along the axial segment.
                double worst = 0.0;
                double prev = d.level(y + from_frame(Vec::axial(-r, zp), f));
                double tprev = -r;
                for (int a = 1; a < ax_res; ++a) {
                    double t = -r + 2.0 * r * a / (ax_res - 1);
                    double cur = d.level(y + from_frame(Vec::axial(t, zp), f));
                    if ((prev < 0.0) != (cur < 0.0)) {
                        double lo = tprev, hi = t, flo = prev;
                        for (int it = 0; it < 80; ++it) {
                            double mid = 0.5 * (lo + hi);
                            double fm = d.level(y + from_frame(Vec::axial(mid, zp), f));
                            if ((flo < 0.0) == (fm < 0.0)) {
                                lo = mid;
                                flo = fm;
                            } else {
                                hi = mid;
                            }
                        }
                        double height = std::abs(0.5 * (lo + hi));
                        if (height > 1e-12 * r) worst = std::max(worst, height);
                    }
                    prev = cur;
                    tprev = t;
                }
                return worst;
            };
            auto classify_sweep = [&](const Vec& zp) {
                // Exterior above the tangent plane or interior below it both
                // force slab thickness.
                double worst = 0.0;
                for (int a = 0; a < ax_res; ++a) {
                    double t = -r + 2.0 * r * a / (ax_res - 1);
                    double lv = d.level(y + from_frame(Vec::axial(t, zp), f));
                    if (lv > kBoundaryBand && t > 0.0) worst = std::max(worst, t);
                    if (lv < -kBoundaryBand && t < 0.0) worst = std::max(worst, -t);
                }
                return worst;
            };

            double worst = 0.0;
            if (d.n == 2) {
                for (int i = 0; i < tan_res; ++i) {
                    Vec zp(1, -r + 2.0 * r * i / (tan_res - 1));
                    worst = std::max(worst, std::max(column_height(zp), classify_sweep(zp)));
                }
            } else {
                const int tr = 17;
                for (int j = 0; j < tr; ++j)
                    for (int i = 0; i < tr; ++i) {
                        Vec zp(2, -r + 2.0 * r * i / (tr - 1), -r + 2.0 * r * j / (tr - 1));
                        if (norm2(zp) > r * r * (1.0 + 1e-12)) continue;
                        worst = std::max(worst, std::max(column_height(zp), classify_sweep(zp)));
                    }
            }
            double dh = worst / r;
            if (dh > rep.delta_hat) {
                rep.delta_hat = dh;
                rep.worst_scale = r;
                rep.worst_point = y;
            }
        }
    }
    rep.pass = rep.delta_hat <= delta;
    return rep;
}

struct OppositionReport {
    double sum_norm = 0.0;
    double bound = 0.0;
    bool pass = false;
    Vec n_P, n_Q;
};

/// |n_P + n_Q| against delta^{1/4}/2 for boundary points of two disjoint
/// domains at distance < r. Outward normals come from the level gradients.
inline OppositionReport normal_opposition_check(const ImplicitDomain& dA, const ImplicitDomain& dB, const Vec& P,
                                                const Vec& Q, double r, double delta) {
    if (std::abs(dA.level(P)) > kBoundaryBand) throw NotOnBoundary("P is not on the first boundary");
    if (std::abs(dB.level(Q)) > kBoundaryBand) throw NotOnBoundary("Q is not on the second boundary");
    if (!(norm(P - Q) < r)) throw InputError("boundary points are not within distance r");
    OppositionReport rep;
    rep.n_P = normalized(dA.grad(P));
    rep.n_Q = normalized(dB.grad(Q));
    rep.sum_norm = norm(rep.n_P + rep.n_Q);
    rep.bound = std::pow(delta, 0.25) / 2.0;
    rep.pass = rep.sum_norm <= rep.bound;
    return rep;
}

}  // namespace layerstack
