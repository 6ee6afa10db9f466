#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "imcflab/corpus.hpp"
#include "imcflab/rng.hpp"

using namespace imcflab;

TEST_CASE("members: exactly linear, aronsson43, angle") {
    const auto all = members();
    REQUIRE(all.size() == 3);
    CHECK(all[0].name == "linear");
    CHECK(all[1].name == "aronsson43");
    CHECK(all[2].name == "angle");
    CHECK_THROWS_AS(member_by_name(all, "nope"), std::invalid_argument);
}

TEST_CASE("aronsson grad_norm at (0.5, 0.5)") {
    const ExactSolution a = aronsson_member();
    // |grad u|^2 = (16/9)(x^{2/3} + y^{2/3})
    CHECK(a.grad_norm(0.5, 0.5) ==
          doctest::Approx((4.0 / 3.0) * std::sqrt(2.0 * std::pow(0.5, 2.0 / 3.0)))
              .epsilon(1e-12));
    CHECK(a.grad_norm(0.5, 0.5) == doctest::Approx(1.4966).epsilon(1e-4));
}

TEST_CASE("angle exact_w vanishes at r = 1") {
    const ExactSolution th = angle_member();
    CHECK(th.exact_w(1.0, 0.0) == doctest::Approx(0.0));
    CHECK(th.exact_w(0.6, 0.8) == doctest::Approx(0.0));  // r = 1
    CHECK(th.exact_w(std::sqrt(2.0), std::sqrt(2.0)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("gradient self-consistency against finite differences") {
    Rng rng(31);
    for (const ExactSolution& sol : members()) {
        int checked = 0;
        while (checked < 1000) {
            double x, y;
            if (sol.domain.kind == Domain::Kind::Rect) {
                x = rng.uniform(-0.95, 0.95);
                y = rng.uniform(-0.95, 0.95);
            } else {
                const double r = rng.uniform(0.55, 1.95);
                const double t = rng.uniform(0.05, 0.5 * std::numbers::pi - 0.05);
                x = r * std::cos(t);
                y = r * std::sin(t);
            }
            if (sol.name == "aronsson43" && (std::abs(x) < 0.02 || std::abs(y) < 0.02))
                continue;  // differencing across the C^{1,1/3} axes is meaningless
            const double d = 1e-7;
            const Point g = sol.grad(x, y);
            const double fdx = (sol.value(x + d, y) - sol.value(x - d, y)) / (2 * d);
            const double fdy = (sol.value(x, y + d) - sol.value(x, y - d)) / (2 * d);
            CHECK(std::abs(g.x - fdx) <= 1e-6 * (1.0 + std::abs(g.x)));
            CHECK(std::abs(g.y - fdy) <= 1e-6 * (1.0 + std::abs(g.y)));
            CHECK(sol.grad_norm(x, y) == doctest::Approx(std::hypot(g.x, g.y)).epsilon(1e-12));
            CHECK(sol.exact_w(x, y) ==
                  doctest::Approx(-std::log(sol.grad_norm(x, y))).epsilon(1e-12));
            ++checked;
        }
    }
}

TEST_CASE("C^2 members satisfy grad u . grad |grad u|^2 = 0 pointwise") {
    Rng rng(17);
    for (const ExactSolution& sol : members()) {
        int checked = 0;
        while (checked < 300) {
            double x, y;
            if (sol.domain.kind == Domain::Kind::Rect) {
                x = rng.uniform(-0.9, 0.9);
                y = rng.uniform(-0.9, 0.9);
                if (sol.name == "aronsson43" && (std::abs(x) < 0.05 || std::abs(y) < 0.05))
                    continue;
            } else {
                const double r = rng.uniform(0.55, 1.95);
                const double t = rng.uniform(0.05, 0.5 * std::numbers::pi - 0.05);
                x = r * std::cos(t);
                y = r * std::sin(t);
            }
            const auto H = sol.hessian(x, y);
            REQUIRE(H.has_value());
            const Point g = sol.grad(x, y);
            // grad |grad u|^2 = 2 H grad u
            const double gx2 = 2.0 * ((*H)[0] * g.x + (*H)[1] * g.y);
            const double gy2 = 2.0 * ((*H)[1] * g.x + (*H)[2] * g.y);
            CHECK(std::abs(g.x * gx2 + g.y * gy2) <= 1e-8 * (1.0 + g.x * g.x + g.y * g.y));
            ++checked;
        }
    }
}

TEST_CASE("sampling: linear values, angle grad_norm, aronsson omega mask") {
    const Grid2D q1 = Grid2D::square(1.0, 5);
    const SampledSolution lin = sample(linear_member(), q1);
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i)
            CHECK(lin.u.at(i, j) == q1.node_y(j));

    const ExactSolution th = angle_member();
    Grid2D sec(0.6, 0.1, 0.1, 4, 4);  // inside the sector
    const SampledSolution s = sample(th, sec);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i)
            CHECK(s.grad_norm.at(i, j) ==
                  doctest::Approx(1.0 / std::hypot(sec.node_x(i), sec.node_y(j))));

    const SampledSolution ar = sample(aronsson_member(), q1);
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i) {
            const bool on_axis = q1.node_x(i) == 0.0 || q1.node_y(j) == 0.0;
            CHECK(ar.omega.defined[q1.node_index(i, j)] == (on_axis ? 0 : 1));
        }

    Grid2D outside(0.0, 0.0, 1.0, 4, 4);
    CHECK_THROWS_AS(sample(th, outside), std::invalid_argument);
}

TEST_CASE("sample_w floors the vanishing gradient and reports the mask") {
    const Grid2D g = Grid2D::square(1.0, 5);  // has the origin node
    auto [w, valid] = sample_w(aronsson_member(), g);
    w.validate();
    const int origin = g.node_index(2, 2);
    CHECK(valid[origin] == 0);
    int invalid = 0;
    for (auto v : valid) invalid += (v == 0);
    CHECK(invalid == 1);
}

TEST_CASE("aronsson |grad|grad u||^q diverges under refinement for q >= 3") {
    const ExactSolution a = aronsson_member();
    for (double q : {3.0, 4.0}) {
        double prev = 0.0;
        for (int n : {33, 65, 129}) {
            const Grid2D g = Grid2D::square(1.0, n);
            ScalarField gn(g);
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    gn.values[g.node_index(i, j)] = a.grad_norm(g.node_x(i), g.node_y(j));
            const VectorField gg = gradient(gn);
            std::vector<double> vals(g.n_cells());
            for (int c = 0; c < g.n_cells(); ++c)
                vals[c] = std::pow(std::hypot(gg.fx[c], gg.fy[c]), q);
            const double v = integrate_cells(g, vals);
            if (prev > 0.0) CHECK(v >= 1.15 * prev);  // honest rate is 2^{(q-3+1)/3}-ish
            prev = v;
        }
    }
    // and the q = 2 seminorm stays bounded (within 2x across the sweep)
    double v0 = 0.0, v1 = 0.0;
    for (int n : {33, 129}) {
        const Grid2D g = Grid2D::square(1.0, n);
        ScalarField gn(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                gn.values[g.node_index(i, j)] = a.grad_norm(g.node_x(i), g.node_y(j));
        const VectorField gg = gradient(gn);
        std::vector<double> vals(g.n_cells());
        for (int c = 0; c < g.n_cells(); ++c)
            vals[c] = std::pow(std::hypot(gg.fx[c], gg.fy[c]), 2.0);
        (n == 33 ? v0 : v1) = integrate_cells(g, vals);
    }
    CHECK(v1 <= 2.0 * v0);
}

TEST_CASE("rescale_to_unit: pinch, unit gradient, negative orientation") {
    const ExactSolution th = angle_member();
    const RescaledMember m = rescale_to_unit(th, {1.5, 0.0}, 0.05);
    const Point g0 = m.grad(0.0, 0.0);
    CHECK(g0.x == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(g0.y == doctest::Approx(1.0).epsilon(1e-10));
    // pinch over Q1
    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        const Point g = m.grad(rng.uniform(-1, 1), rng.uniform(-1, 1));
        CHECK(std::hypot(g.x, g.y - 1.0) <= 0.05);
    }
    // reflection happened: a < 0 (the member's own orientation is +1)
    CHECK(m.a < 0.0);
}

TEST_CASE("make_prop1_problem: linear slab is exactly {-3/4 < x2 < 3/4}") {
    const Prop1Problem p1 = make_prop1_problem(linear_member(), 0.05, 0.5, {0.0, 0.0}, 65);
    const Grid2D& g = p1.problem.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const bool inside = std::abs(g.node_y(j)) < 0.75;
            const bool is_ext = p1.problem.state[g.node_index(i, j)] == NodeState::Exterior;
            CHECK(inside != is_ext);
        }
    CHECK(p1.lipschitz_bound ==
          doctest::Approx(0.05 / std::sqrt(0.25 - 0.0025)).epsilon(1e-12));
}

TEST_CASE("make_prop1_problem: tilted linear slab contains [-1,1]x[-1/2,1/2]") {
    const double nn = std::hypot(0.03, 1.0);
    const ExactSolution tilted = linear_member({0.03 / nn, 1.0 / nn});
    const Prop1Problem p1 = make_prop1_problem(tilted, 0.05, 0.5, {0.0, 0.0}, 65);
    const Grid2D& g = p1.problem.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (std::abs(g.node_y(j)) <= 0.5)
                CHECK(p1.problem.state[g.node_index(i, j)] != NodeState::Exterior);
        }
}

TEST_CASE("make_prop1_problem rejects out-of-range delta/sigma and pinch failures") {
    CHECK_THROWS_AS(make_prop1_problem(linear_member(), 0.2, 0.5, {0, 0}, 33),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_prop1_problem(linear_member(), 0.05, 0.4, {0, 0}, 33),
                    std::invalid_argument);
    // a gradient zero at the rescaling center is rejected outright
    CHECK_THROWS_AS(make_prop1_problem(aronsson_member(), 0.05, 0.5, {0.0, 0.0}, 33),
                    std::invalid_argument);
}
