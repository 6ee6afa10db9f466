#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "imcflab/grid.hpp"
#include "imcflab/rng.hpp"

using namespace imcflab;

namespace {
ScalarField fill(const Grid2D& g, double (*f)(double, double)) {
    ScalarField s(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            s.at(i, j) = f(g.node_x(i), g.node_y(j));
    return s;
}
}  // namespace

TEST_CASE("gradient of a constant field is zero") {
    const Grid2D g = Grid2D::square(1.0, 17);
    ScalarField u(g, 5.0);
    const VectorField gr = gradient(u);
    for (int c = 0; c < g.n_cells(); ++c) {
        CHECK(gr.fx[c] == 0.0);
        CHECK(gr.fy[c] == 0.0);
    }
}

TEST_CASE("gradient of u = x2 on Q1 with h = 0.25 is (0, 1) everywhere") {
    const Grid2D g = Grid2D::square(1.0, 9);
    CHECK(g.h == doctest::Approx(0.25));
    const ScalarField u = fill(g, [](double, double y) { return y; });
    const VectorField gr = gradient(u);
    for (int c = 0; c < g.n_cells(); ++c) {
        CHECK(gr.fx[c] == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(gr.fy[c] == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("gradient of u = x1 x2 on Q1 with h = 0.5: cell (0.25, 0.25) gives (0.25, 0.25)") {
    // hand evaluation of the one-sided differences over the nodal samples:
    // corners (0,0), (0.5,0), (0,0.5), (0.5,0.5) carry 0, 0, 0, 0.25;
    // gx = (0-0 + 0.25-0)/(2*0.5) = 0.25, gy likewise.
    const Grid2D g = Grid2D::square(1.0, 5);
    const ScalarField u = fill(g, [](double x, double y) { return x * y; });
    const VectorField gr = gradient(u);
    const int c = g.cell_index(2, 2);
    CHECK(g.cell_cx(2) == doctest::Approx(0.25));
    CHECK(gr.fx[c] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(gr.fy[c] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("gradient is exact on affine fields") {
    const Grid2D g(-0.3, 0.7, 0.01, 41, 37);
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = rng.uniform(-2, 2), bx = rng.uniform(-2, 2), by = rng.uniform(-2, 2);
        ScalarField u(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                u.at(i, j) = a + bx * g.node_x(i) + by * g.node_y(j);
        const VectorField gr = gradient(u);
        for (int c = 0; c < g.n_cells(); ++c) {
            CHECK(std::abs(gr.fx[c] - bx) <= 1e-12);
            CHECK(std::abs(gr.fy[c] - by) <= 1e-12);
        }
    }
}

TEST_CASE("perp definition and involution") {
    const Grid2D g = Grid2D::square(1.0, 9);
    VectorField f(g, 0.0, 1.0);
    VectorField pf = perp(f);
    for (int c = 0; c < g.n_cells(); ++c) {
        CHECK(pf.fx[c] == -1.0);
        CHECK(pf.fy[c] == 0.0);
    }
    VectorField e1(g, 1.0, 0.0);
    VectorField pe1 = perp(e1);
    CHECK(pe1.fx[0] == 0.0);
    CHECK(pe1.fy[0] == 1.0);

    // perp(perp(g)) == -g and |perp(g)| == |g| exactly, on random fields
    Rng rng(3);
    VectorField r(g);
    for (int c = 0; c < g.n_cells(); ++c) {
        r.fx[c] = rng.uniform(-5, 5);
        r.fy[c] = rng.uniform(-5, 5);
    }
    const VectorField pp = perp(perp(r));
    for (int c = 0; c < g.n_cells(); ++c) {
        CHECK(pp.fx[c] == -r.fx[c]);
        CHECK(pp.fy[c] == -r.fy[c]);
        CHECK(std::hypot(perp(r).fx[c], perp(r).fy[c]) == std::hypot(r.fx[c], r.fy[c]));
    }
}

TEST_CASE("integrate: constants, odd symmetry, quadratic accuracy") {
    const Grid2D g = Grid2D::square(1.0, 65);
    ScalarField one(g, 1.0);
    CHECK(integrate(one) == doctest::Approx(4.0).epsilon(1e-15));

    const ScalarField x1 = fill(g, [](double x, double) { return x; });
    CHECK(std::abs(integrate(x1)) <= 1e-13);

    const ScalarField x1sq = fill(g, [](double x, double) { return x * x; });
    CHECK(std::abs(integrate(x1sq) - 4.0 / 3.0) <= 1e-3);
}

TEST_CASE("integrate: nonnegativity and mask additivity") {
    const Grid2D g = Grid2D::square(1.0, 33);
    const ScalarField s = fill(g, [](double x, double y) { return x * x + 0.3 * y * y; });
    CHECK(integrate(s) >= 0.0);

    CellMask left(g.n_cells(), 0), right(g.n_cells(), 0), both(g.n_cells(), 0);
    for (int cj = 0; cj < g.cells_y(); ++cj)
        for (int ci = 0; ci < g.cells_x(); ++ci) {
            const int c = g.cell_index(ci, cj);
            both[c] = 1;
            (g.cell_cx(ci) < 0.0 ? left : right)[c] = 1;
        }
    CHECK(integrate(s, &left) + integrate(s, &right) ==
          doctest::Approx(integrate(s, &both)).epsilon(1e-12));
}

TEST_CASE("test function: profile, analytic gradient and laplacian") {
    TestFunction eta{{0.2, -0.1}, 0.35};
    CHECK(eta.value(0.2, -0.1) == doctest::Approx(1.0));
    CHECK(eta.value(0.2 + 0.35, -0.1) == 0.0);
    CHECK(eta.value(0.9, 0.9) == 0.0);
    CHECK(eta.gradient(0.9, 0.9).x == 0.0);

    // finite-difference cross-checks in the interior of the support
    const double d = 1e-6;
    for (auto [x, y] : {std::pair{0.25, -0.05}, {0.1, -0.2}, {0.3, 0.05}}) {
        const Point gr = eta.gradient(x, y);
        const double fdx = (eta.value(x + d, y) - eta.value(x - d, y)) / (2 * d);
        const double fdy = (eta.value(x, y + d) - eta.value(x, y - d)) / (2 * d);
        CHECK(gr.x == doctest::Approx(fdx).epsilon(1e-5));
        CHECK(gr.y == doctest::Approx(fdy).epsilon(1e-5));
        const double lap = (eta.value(x + d, y) + eta.value(x - d, y) + eta.value(x, y + d) +
                            eta.value(x, y - d) - 4 * eta.value(x, y)) /
                           (d * d);
        CHECK(eta.laplacian(x, y) == doctest::Approx(lap).epsilon(1e-3));
    }
}

TEST_CASE("weak divergence residual: zero data and rejected supports") {
    const Grid2D g = Grid2D::square(1.0, 33);
    VectorField F(g, 0.0, 0.0);
    ScalarField s(g, 0.0);
    const std::vector<TestFunction> tests{{{0.0, 0.0}, 0.4}};
    const auto r = weak_divergence_residual(F, s, tests);
    CHECK(r[0] == 0.0);

    const std::vector<TestFunction> bad{{{0.9, 0.9}, 0.4}};
    CHECK_THROWS_AS(weak_divergence_residual(F, s, bad), std::invalid_argument);
}

TEST_CASE("weak divergence residual: div(x/|x|) = 1/|x| vanishes under refinement") {
    // symbolic oracle: div(x/|x|) = 1/|x| in 2D, so r(eta) is quadrature error only
    double prev = 0.0;
    for (int n : {129, 257}) {
        const Grid2D g(-2.0, -2.0, 4.0 / (n - 1), n, n);
        VectorField F(g);
        CellMask mask(g.n_cells(), 0);
        for (int cj = 0; cj < g.cells_y(); ++cj)
            for (int ci = 0; ci < g.cells_x(); ++ci) {
                const double x = g.cell_cx(ci), y = g.cell_cy(cj);
                const double r = std::hypot(x, y);
                const int c = g.cell_index(ci, cj);
                if (r < 0.5 || r > 2.0) continue;
                F.fx[c] = x / r;
                F.fy[c] = y / r;
                mask[c] = 1;
            }
        ScalarField s(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                s.at(i, j) = 1.0 / std::max(1e-9, std::hypot(g.node_x(i), g.node_y(j)));
        const std::vector<TestFunction> tests{{{1.0, 0.5}, 0.3}, {{-0.9, -0.6}, 0.25}};
        double mx = 0.0;
        for (double v : weak_divergence_residual(F, s, tests, &mask))
            mx = std::max(mx, std::abs(v));
        CHECK(mx <= 1.0 * g.h);  // O(h) upper envelope
        if (prev > 0.0) CHECK(mx < prev);
        prev = mx;
    }
}

TEST_CASE("discrete integration by parts at O(h^2)") {
    // int grad v . grad eta + int v * lap(eta) -> 0 for smooth v, analytic eta derivatives
    const TestFunction eta{{0.1, 0.0}, 0.5};
    auto veval = [](double x, double y) {
        return std::sin(std::numbers::pi * x) * std::cos(0.5 * std::numbers::pi * y);
    };
    double prev = 0.0;
    for (int n : {33, 65, 129}) {
        const Grid2D g = Grid2D::square(1.0, n);
        ScalarField v(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                v.at(i, j) = veval(g.node_x(i), g.node_y(j));
        const VectorField gv = gradient(v);
        const std::vector<double> vc = nodes_to_cells(v);
        std::vector<double> integrand(g.n_cells());
        for (int cj = 0; cj < g.cells_y(); ++cj)
            for (int ci = 0; ci < g.cells_x(); ++ci) {
                const double x = g.cell_cx(ci), y = g.cell_cy(cj);
                const int c = g.cell_index(ci, cj);
                const Point ge = eta.gradient(x, y);
                integrand[c] = gv.fx[c] * ge.x + gv.fy[c] * ge.y + vc[c] * eta.laplacian(x, y);
            }
        const double r = std::abs(integrate_cells(g, integrand));
        if (prev > 0.0) CHECK(r <= 0.35 * prev);  // at least second order
        prev = r;
    }
    CHECK(prev <= 1e-3);
}

TEST_CASE("bilinear interpolation reproduces bilinear data") {
    const Grid2D g = Grid2D::square(1.0, 17);
    ScalarField u(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            u.at(i, j) = 2.0 + 0.5 * g.node_x(i) - g.node_y(j) + 3.0 * g.node_x(i) * g.node_y(j);
    Rng rng(5);
    for (int k = 0; k < 50; ++k) {
        const double x = rng.uniform(-0.99, 0.99), y = rng.uniform(-0.99, 0.99);
        CHECK(u.interpolate(x, y) ==
              doctest::Approx(2.0 + 0.5 * x - y + 3.0 * x * y).epsilon(1e-12));
    }
}

TEST_CASE("scalar field validation rejects non-finite values") {
    const Grid2D g = Grid2D::square(1.0, 9);
    ScalarField u(g, 1.0);
    u.at(3, 4) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(u.validate(), doctest::Contains("(3, 4)"), std::invalid_argument);
}
