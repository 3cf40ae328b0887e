#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "layerstack/domains.hpp"

using namespace layerstack;

namespace {

Vec random_in_ball(std::mt19937_64& rng, int n, double R) {
    std::uniform_real_distribution<double> u(-R, R);
    for (;;) {
        Vec p = Vec::zero(n);
        for (int i = 0; i < n; ++i) p[i] = u(rng);
        if (norm2(p) <= R * R) return p;
    }
}

/// Independent column root: fine scan plus bisection, no derivatives.
double bisect_column(const ImplicitDomain& d, const Frame& f, const Vec& yp, double span) {
    auto fv = [&](double t) { return d.level(from_frame(Vec::axial(t, yp), f)); };
    const int scan = 4097;
    double prev = fv(-span), tprev = -span;
    double lo = 0.0, hi = 0.0;
    bool found = false;
    for (int i = 1; i < scan; ++i) {
        double t = -span + 2.0 * span * i / (scan - 1);
        double cur = fv(t);
        if ((prev < 0.0) != (cur < 0.0)) {
            REQUIRE_FALSE(found);  // single crossing expected
            lo = tprev;
            hi = t;
            found = true;
        }
        prev = cur;
        tprev = t;
    }
    REQUIRE(found);
    double flo = fv(lo);
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (lo + hi);
        double fm = fv(m);
        if (fm == 0.0) return m;
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("levels: closed-form values and signs") {
    auto ball = ImplicitDomain::ball(Vec(2, 0.0, 0.0), 1.0);
    CHECK(ball.level(Vec(2, 2.0, 0.0)) == Catch::Approx(1.0).margin(1e-15));
    CHECK(ball.level(Vec(2, 0.5, 0.0)) == Catch::Approx(-0.5).margin(1e-15));
    Vec g = ball.grad(Vec(2, 0.0, 2.0));
    CHECK(g[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(g[1] == Catch::Approx(1.0).margin(1e-15));

    auto half = ImplicitDomain::half_space(Vec(2, 1.0, 0.0), 0.0);
    CHECK(half.level(Vec(2, 0.3, 7.0)) == Catch::Approx(-0.3).margin(1e-15));
    CHECK(classify_point(half, Vec(2, 0.3, 7.0)) == Region::Interior);
    CHECK(classify_point(half, Vec(2, -0.3, 7.0)) == Region::Exterior);
    CHECK(classify_point(half, Vec(2, 0.0, 7.0)) == Region::BoundaryBand);

    auto ell = ImplicitDomain::ellipsoid(Vec(2, 0.0, 0.0), Vec(2, 2.0, 1.0));
    CHECK(ell.level(Vec(2, 2.0, 0.0)) == Catch::Approx(0.0).margin(1e-15));
    CHECK(ell.level(Vec(2, 0.0, 1.0)) == Catch::Approx(0.0).margin(1e-15));
    Vec ge = ell.grad(Vec(2, 2.0, 0.0));
    CHECK(ge[0] == Catch::Approx(0.5).margin(1e-14));
    CHECK(ge[1] == Catch::Approx(0.0).margin(1e-14));

    // Radius 1 + 0.05 cos(4 angle): boundary radius 1.05 on the axes, 0.95 on
    // the diagonals.
    auto blob = ImplicitDomain::blob(Vec(2, 0.0, 0.0), 1.0, 0.05, 4);
    CHECK(blob.level(Vec(2, 1.05, 0.0)) == Catch::Approx(0.0).margin(1e-14));
    CHECK(blob.level(Vec(2, 0.0, 1.05)) == Catch::Approx(0.0).margin(1e-14));
    double d = 0.95 / std::sqrt(2.0);
    CHECK(blob.level(Vec(2, d, d)) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("levels: complement negates and is an involution") {
    auto ball = ImplicitDomain::ball(Vec(2, 0.25, -0.5), 0.75);
    auto comp = ball.complement();
    std::mt19937_64 rng(11);
    for (int k = 0; k < 64; ++k) {
        Vec p = random_in_ball(rng, 2, 2.0);
        CHECK(comp.level(p) == -ball.level(p));
        Vec g1 = ball.grad(p), g2 = comp.grad(p);
        for (int i = 0; i < 2; ++i) CHECK(g2[i] == -g1[i]);
    }
    CHECK(comp.complement().same_geometry(ball));
    CHECK_FALSE(comp.same_geometry(ball));
}

TEST_CASE("levels: gradient matches a central finite difference") {
    std::mt19937_64 rng(17);
    std::vector<ImplicitDomain> shapes = {
        ImplicitDomain::ball(Vec(2, 0.1, -0.2), 0.8),
        ImplicitDomain::half_space(normalized(Vec(2, 1.0, 2.0)), 0.3),
        ImplicitDomain::ellipsoid(Vec(2, 0.0, 0.1), Vec(2, 1.5, 0.7)),
        ImplicitDomain::blob(Vec(2, 0.0, 0.0), 1.0, 0.05, 4, 0.3),
        ImplicitDomain::ball(Vec(3, 0.1, 0.0, -0.1), 0.9),
        ImplicitDomain::ellipsoid(Vec(3, 0.0, 0.0, 0.0), Vec(3, 1.0, 0.8, 1.2)),
    };
    const double step = 1e-6;
    for (const auto& d : shapes) {
        for (int k = 0; k < 32; ++k) {
            Vec p = random_in_ball(rng, d.n, 2.0);
            if (std::abs(d.level(p)) < 1e-3) continue;  // keep away from gradient kinks at centers
            if (d.kind != Shape::HalfSpace && norm(p - d.center) < 0.2) continue;
            Vec g = d.grad(p);
            for (int i = 0; i < d.n; ++i) {
                Vec pp = p, pm = p;
                pp[i] += step;
                pm[i] -= step;
                double fd = (d.level(pp) - d.level(pm)) / (2.0 * step);
                CHECK(g[i] == Catch::Approx(fd).margin(1e-6));
            }
        }
    }
}

TEST_CASE("levels: recentering is an exact coordinate change") {
    std::mt19937_64 rng(23);
    auto ball = ImplicitDomain::ball(Vec(2, 1.0, -0.5), 0.75);
    auto half = ImplicitDomain::half_space(normalized(Vec(2, 3.0, 4.0)), 0.25);
    Vec q(2, 0.375, -0.125);  // dyadic shift keeps the arithmetic exact
    auto ballq = ball.recentered(q);
    auto halfq = half.recentered(q);
    for (int k = 0; k < 64; ++k) {
        Vec p = random_in_ball(rng, 2, 2.0);
        CHECK(ballq.level(p) == ball.level(p + q));
        CHECK(halfq.level(p) == Catch::Approx(half.level(p + q)).margin(1e-15));
    }
}

TEST_CASE("levels: boundary parameterizations lie on the zero set") {
    std::vector<ImplicitDomain> shapes = {
        ImplicitDomain::ball(Vec(2, 0.3, 0.1), 1.2),
        ImplicitDomain::ellipsoid(Vec(2, -0.2, 0.0), Vec(2, 0.9, 1.4)),
        ImplicitDomain::blob(Vec(2, 0.1, 0.2), 1.0, 0.04, 5, 1.0),
        ImplicitDomain::half_space(normalized(Vec(2, 1.0, -1.0)), 0.5),
        ImplicitDomain::ball(Vec(3, 0.0, 0.2, 0.0), 0.8),
        ImplicitDomain::ellipsoid(Vec(3, 0.0, 0.0, 0.1), Vec(3, 1.1, 0.9, 0.7)),
        ImplicitDomain::half_space(normalized(Vec(3, 0.0, 1.0, 2.0)), -0.3),
    };
    for (const auto& d : shapes) {
        auto pts = d.boundary_points(d.n == 2 ? 64 : 256);
        REQUIRE(pts.size() >= 64);
        for (const auto& p : pts) CHECK(std::abs(d.level(p)) <= 1e-10);
    }
}

TEST_CASE("grid: node coordinates are exact and symmetric") {
    auto g = GridFn::make(1, 17, 0.25);
    CHECK(g.coord(8) == 0.0);
    CHECK(g.coord(0) == -0.25);
    CHECK(g.coord(16) == 0.25);
    for (int i = 0; i < 17; ++i) CHECK(g.coord(i) == -g.coord(16 - i));
    CHECK_THROWS_AS(GridFn::make(1, 16, 1.0), InputError);
    CHECK_THROWS_AS(GridFn::make(1, 3, 1.0), InputError);
}

TEST_CASE("grid: interpolation reproduces linear functions everywhere") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto g = GridFn::make(2, 9, 1.0);
    double a = 0.3, b = -0.7, c = 0.2;
    for (int j = 0; j < g.res; ++j)
        for (int i = 0; i < g.res; ++i) g.node(i, j) = a + b * g.coord(i) + c * g.coord(j);
    for (int k = 0; k < 256; ++k) {
        Vec y(2, u(rng), u(rng));
        CHECK(g.value(y) == Catch::Approx(a + b * y[0] + c * y[1]).margin(1e-13));
        Vec grd = g.gradient(y);
        CHECK(grd[0] == Catch::Approx(b).margin(1e-10));
        CHECK(grd[1] == Catch::Approx(c).margin(1e-10));
    }
}

TEST_CASE("grid: interpolation reproduces quadratics away from the edge") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-0.7, 0.7);  // stay out of the edge cells
    auto g = GridFn::make(1, 17, 1.0);
    for (int i = 0; i < g.res; ++i) {
        double x = g.coord(i);
        g.node(i) = 2.0 * x * x - 0.5 * x + 0.25;
    }
    for (int k = 0; k < 128; ++k) {
        double x = u(rng);
        CHECK(g.value(Vec(1, x)) == Catch::Approx(2.0 * x * x - 0.5 * x + 0.25).margin(1e-13));
        CHECK(g.gradient(Vec(1, x))[0] == Catch::Approx(4.0 * x - 0.5).margin(1e-10));
    }
}

TEST_CASE("grid: node gradient equals the interpolant gradient at nodes") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto g = GridFn::make(2, 9, 0.5);
    for (auto& v : g.v) v = u(rng);
    for (int j = 0; j < g.res; ++j)
        for (int i = 0; i < g.res; ++i) {
            Vec at_node = g.gradient(g.node_coords(i, j));
            Vec ng = g.node_grad(i, j);
            CHECK(ng[0] == Catch::Approx(at_node[0]).margin(1e-10));
            CHECK(ng[1] == Catch::Approx(at_node[1]).margin(1e-10));
        }
}

TEST_CASE("grid: disk nodes of a 5x5 grid") {
    auto g = GridFn::make(2, 5, 1.0);
    CHECK(g.disk_nodes().size() == 13);  // hand count: 1 center + 4 + 4 mid + 4 axis rim
    auto g1 = GridFn::make(1, 9, 1.0);
    CHECK(g1.disk_nodes().size() == 9);
}

TEST_CASE("closest boundary point: radial closed forms") {
    // Origin outside the ball: x = c (1 - rho/|c|) at distance |c| - rho.
    {
        auto d = ImplicitDomain::ball(Vec(2, 2.0, 0.0), 1.0);
        Vec x = closest_boundary_point(d, 1.5);
        CHECK(x[0] == Catch::Approx(1.0).margin(1e-9));
        CHECK(x[1] == Catch::Approx(0.0).margin(1e-9));
        CHECK(std::abs(d.level(x)) <= 1e-10);
    }
    // Origin inside: same formula, boundary on the far side of the origin.
    {
        auto d = ImplicitDomain::ball(Vec(2, 0.3, 0.4), 2.0);
        Vec x = closest_boundary_point(d, 2.0);
        CHECK(x[0] == Catch::Approx(-0.9).margin(1e-9));
        CHECK(x[1] == Catch::Approx(-1.2).margin(1e-9));
    }
    // Half-space: the foot of the perpendicular from the origin.
    {
        double al = 0.7, off = 1e-3;
        auto d = ImplicitDomain::half_space(Vec(2, std::cos(al), std::sin(al)), off);
        Vec x = closest_boundary_point(d, 0.01);
        CHECK(x[0] == Catch::Approx(off * std::cos(al)).margin(1e-12));
        CHECK(x[1] == Catch::Approx(off * std::sin(al)).margin(1e-12));
    }
    // Tiny scale: answers stay exact relative to R.
    {
        auto d = ImplicitDomain::ball(Vec(2, 1e-5, 0.0), 0.5e-5);
        Vec x = closest_boundary_point(d, 1e-5);
        CHECK(x[0] == Catch::Approx(0.5e-5).margin(1e-17));
        CHECK(x[1] == Catch::Approx(0.0).margin(1e-17));
    }
    // 3-D ball.
    {
        auto d = ImplicitDomain::ball(Vec(3, 0.0, 0.0, 1.5), 1.0);
        Vec x = closest_boundary_point(d, 1.0);
        CHECK(x[0] == Catch::Approx(0.0).margin(1e-9));
        CHECK(x[1] == Catch::Approx(0.0).margin(1e-9));
        CHECK(x[2] == Catch::Approx(0.5).margin(1e-9));
    }
}

TEST_CASE("closest boundary point: gradient parallelism and failure modes") {
    auto ell = ImplicitDomain::ellipsoid(Vec(2, 0.6, 0.3), Vec(2, 0.5, 0.25));
    Vec x = closest_boundary_point(ell, 1.0);
    CHECK(std::abs(ell.level(x)) <= 1e-10);
    Vec g = normalized(ell.grad(x));
    Vec xu = normalized(x);
    double sin_angle = std::sqrt(std::max(0.0, 1.0 - dot(g, xu) * dot(g, xu)));
    CHECK(sin_angle <= 1e-6);

    // Boundary outside the query ball.
    auto d = ImplicitDomain::ball(Vec(2, 0.0, 0.0), 1.0);
    CHECK_THROWS_AS(closest_boundary_point(d, 0.5), NoBoundaryInBall);
    // Center exactly on the boundary short-circuits to the origin.
    auto on = ImplicitDomain::ball(Vec(2, 1.0, 0.0), 1.0);
    Vec z = closest_boundary_point(on, 0.01);
    CHECK(norm(z) == 0.0);
}

TEST_CASE("boundary meets ball: sampled predicate") {
    auto ball = ImplicitDomain::ball(Vec(2, 0.0, 0.0), 1.0);
    CHECK(boundary_meets_ball(ball, Vec(2, 1.0, 0.0), 1e-3));
    CHECK(boundary_meets_ball(ball, Vec(2, 0.0, 0.0), 3.0));
    CHECK_FALSE(boundary_meets_ball(ball, Vec(2, 0.0, 0.0), 0.5));
    CHECK_FALSE(boundary_meets_ball(ball, Vec(2, 2.5, 0.0), 0.5));
    CHECK(boundary_meets_ball(ball.complement(), Vec(2, 1.0, 0.0), 1e-3));
    auto half = ImplicitDomain::half_space(Vec(3, 1.0, 0.0, 0.0), 0.0);
    CHECK(boundary_meets_ball(half, Vec(3, 0.0, 0.2, 0.1), 0.05));
    CHECK_FALSE(boundary_meets_ball(half, Vec(3, 0.5, 0.2, 0.1), 0.05));
}

TEST_CASE("chart: circle graph matches the sagitta formula") {
    // Unit circle through the origin, inward normal e_1: the graph in the
    // identity frame is rho - sqrt(rho^2 - |y'|^2).
    auto d = ImplicitDomain::ball(Vec(2, 1.0, 0.0), 1.0);
    double R = 0.01;
    auto chart = local_chart(d, Vec(2, 0.0, 0.0), R, nullptr, 17);
    CHECK(norm(chart.anchor) == 0.0);
    CHECK(norm(chart.frame.basis(0) - Vec::unit(2, 0)) == 0.0);
    REQUIRE(chart.psi.res == chart_resolution(17));
    CHECK(chart.psi.half == 8.0 * R);
    for (int i = 0; i < chart.psi.res; ++i) {
        double yp = chart.psi.coord(i);
        double oracle = 1.0 - std::sqrt(1.0 - yp * yp);
        CHECK(chart.psi.node(i) == Catch::Approx(oracle).margin(1e-12));
    }
    CHECK(chart.psi.node((chart.psi.res - 1) / 2) == 0.0);
}

TEST_CASE("chart: sphere graph in three dimensions") {
    auto d = ImplicitDomain::ball(Vec(3, 1.0, 0.0, 0.0), 1.0);
    double R = 0.01;
    auto chart = local_chart(d, Vec(3, 0.0, 0.0, 0.0), R, nullptr, 9);
    REQUIRE(chart.psi.dim == 2);
    for (int j = 0; j < chart.psi.res; j += 4)
        for (int i = 0; i < chart.psi.res; i += 4) {
            Vec yp = chart.psi.node_coords(i, j);
            double r2 = norm2(yp);
            double oracle = 1.0 - std::sqrt(1.0 - r2);
            CHECK(chart.psi.node(i, j) == Catch::Approx(oracle).margin(1e-12));
        }
}

TEST_CASE("chart: blob graph matches an independent bisection solve") {
    auto d = ImplicitDomain::blob(Vec(2, 0.0, 0.0), 1.0, 0.05, 4);
    Vec center(2, 1.05, 0.0);
    double R = 1e-3;
    auto chart = local_chart(d, center, R, nullptr, 17);
    auto drec = d.recentered(center);
    for (int i = 0; i < chart.psi.res; ++i) {
        Vec yp(1, chart.psi.coord(i));
        double oracle = bisect_column(drec, chart.frame, yp, 8.0 * R);
        CHECK(chart.psi.node(i) == Catch::Approx(oracle).margin(1e-10));
    }
}

TEST_CASE("chart: graph side agrees with the level sign near the center") {
    std::mt19937_64 rng(0x5EED);
    auto run = [&](const ImplicitDomain& d, const Vec& center, double R) {
        auto chart = local_chart(d, center, R, nullptr, 17);
        auto drec = d.recentered(center);
        int checked = 0;
        for (int k = 0; k < 10000; ++k) {
            Vec p = random_in_ball(rng, d.n, R);
            double lv = drec.level(p);
            if (std::abs(lv) <= 1e-9) continue;
            Vec y = to_frame(p, chart.frame);
            double side = y[0] - chart.psi.value(y.primed());
            if (std::abs(side) <= 1e-9) continue;
            // Inward normal is the first axis: interior means above the graph.
            CHECK((lv < 0.0) == (side > 0.0));
            ++checked;
        }
        CHECK(checked > 9000);
    };
    run(ImplicitDomain::ball(Vec(2, 1.0, 0.0), 1.0), Vec(2, 0.0, 0.0), 0.01);
    run(ImplicitDomain::blob(Vec(2, 0.0, 0.0), 1.0, 0.05, 4), Vec(2, 1.05, 0.0), 1e-3);
    run(ImplicitDomain::ball(Vec(2, 1.0, 0.0), 1.0).complement(), Vec(2, 0.0, 0.0), 0.01);
}

TEST_CASE("chart: solve-grid nodes are chart nodes bit for bit") {
    double R = 1.0851e-5;
    int grid_res = 17;
    auto chart_grid = GridFn::make(1, chart_resolution(grid_res), 8.0 * R);
    auto solve_grid = GridFn::make(1, grid_res, R);
    int off = 7 * (grid_res - 1) / 2;
    for (int i = 0; i < grid_res; ++i) CHECK(chart_grid.coord(i + off) == solve_grid.coord(i));
}

TEST_CASE("chart: multiple crossings in the solve window are rejected") {
    // Ball of radius comparable to the window: both boundary sheets fall
    // inside (-8R, 8R) along the axis.
    auto d = ImplicitDomain::ball(Vec(2, 0.02, 0.0), 0.02);
    CHECK_THROWS_AS(local_chart(d, Vec(2, 0.0, 0.0), 0.01, nullptr, 17), MultipleCrossings);
}
