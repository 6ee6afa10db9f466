#include "imcflab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace imcflab {

namespace {
constexpr double kPi = std::numbers::pi;

double cbrt_pow(double t, double e) {  // |t|^e
    return std::pow(std::abs(t), e);
}
}  // namespace

bool Domain::contains(double x, double y) const {
    if (kind == Kind::Rect) return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    const double r = std::hypot(x, y);
    if (r < rmin - 1e-12 || r > rmax + 1e-12) return false;
    const double t = std::atan2(y, x);
    return t >= tmin - 1e-12 && t <= tmax + 1e-12;
}

double Domain::boundary_distance(double x, double y) const {
    if (kind == Kind::Rect)
        return std::min(std::min(x - x0, x1 - x), std::min(y - y0, y1 - y));
    const double r = std::hypot(x, y);
    double d = std::min(r - rmin, rmax - r);
    // distance to the straight edges theta = tmin, tmax (rays from the origin)
    const double t = std::atan2(y, x);
    d = std::min(d, r * std::sin(std::max(0.0, t - tmin)));
    d = std::min(d, r * std::sin(std::max(0.0, tmax - t)));
    return d;
}

double ExactSolution::exact_w(double x, double y) const { return -std::log(grad_norm(x, y)); }

ExactSolution linear_member(Point xi) {
    if (xi.x == 0.0 && xi.y == 0.0)
        throw std::invalid_argument("linear_member: xi must be nonzero");
    ExactSolution s;
    s.name = "linear";
    s.domain = Domain{};  // Q1
    s.smoothness = "C^inf everywhere";
    const double n = std::hypot(xi.x, xi.y);
    s.value = [xi](double x, double y) { return xi.x * x + xi.y * y; };
    s.grad = [xi](double, double) { return Point{xi.x, xi.y}; };
    s.grad_norm = [n](double, double) { return n; };
    // both orientations are admissible for a constant gradient; +1 by tie-break
    s.omega = [](double, double) { return OmegaSample{+1, true, false}; };
    s.hessian = [](double, double) {
        return std::optional<std::array<double, 3>>{{0.0, 0.0, 0.0}};
    };
    return s;
}

ExactSolution aronsson_member() {
    ExactSolution s;
    s.name = "aronsson43";
    s.domain = Domain{};  // Q1
    s.smoothness = "C^{1,1/3} on the axes, C^inf off them";
    s.globally_orientable = false;  // omega exists only off the coordinate axes
    s.value = [](double x, double y) { return cbrt_pow(x, 4.0 / 3.0) - cbrt_pow(y, 4.0 / 3.0); };
    s.grad = [](double x, double y) {
        const double c = 4.0 / 3.0;
        return Point{c * std::copysign(cbrt_pow(x, 1.0 / 3.0), x),
                     -c * std::copysign(cbrt_pow(y, 1.0 / 3.0), y)};
    };
    s.grad_norm = [](double x, double y) {
        return (4.0 / 3.0) * std::sqrt(cbrt_pow(x, 2.0 / 3.0) + cbrt_pow(y, 2.0 / 3.0));
    };
    s.omega = [](double x, double y) {
        if (x == 0.0 || y == 0.0) return OmegaSample{0, false, true};
        return OmegaSample{(x * y) > 0 ? +1 : -1, true, true};
    };
    s.hessian = [](double x, double y) -> std::optional<std::array<double, 3>> {
        if (x == 0.0 || y == 0.0) return std::nullopt;  // not C^2 on the axes
        const double c = 4.0 / 9.0;
        return std::array<double, 3>{c * cbrt_pow(x, -2.0 / 3.0), 0.0,
                                     -c * cbrt_pow(y, -2.0 / 3.0)};
    };
    return s;
}

ExactSolution angle_member() {
    ExactSolution s;
    s.name = "angle";
    s.domain.kind = Domain::Kind::AnnularSector;
    s.domain.rmin = 0.5;
    s.domain.rmax = 2.0;
    s.domain.tmin = 0.0;
    s.domain.tmax = 0.5 * kPi;
    s.smoothness = "C^inf on the closed sector";
    s.value = [](double x, double y) { return std::atan2(y, x); };
    s.grad = [](double x, double y) {
        const double r2 = x * x + y * y;
        return Point{-y / r2, x / r2};
    };
    s.grad_norm = [](double x, double y) { return 1.0 / std::hypot(x, y); };
    // g = 1/r increases in the perp(grad u) = -x/r^2 (inward) direction
    s.omega = [](double, double) { return OmegaSample{+1, true, true}; };
    s.hessian = [](double x, double y) -> std::optional<std::array<double, 3>> {
        const double r2 = x * x + y * y;
        const double r4 = r2 * r2;
        return std::array<double, 3>{2.0 * x * y / r4, (y * y - x * x) / r4,
                                     -2.0 * x * y / r4};
    };
    return s;
}

std::vector<ExactSolution> members() {
    return {linear_member(), aronsson_member(), angle_member()};
}

const ExactSolution& member_by_name(const std::vector<ExactSolution>& all,
                                    const std::string& name) {
    for (const auto& m : all)
        if (m.name == name) return m;
    throw std::invalid_argument("unknown corpus member: " + name);
}

SampledSolution sample(const ExactSolution& sol, const Grid2D& grid) {
    SampledSolution out;
    out.u = ScalarField(grid);
    out.grad_norm = ScalarField(grid);
    out.omega.grid = grid;
    out.omega.omega.assign(static_cast<std::size_t>(grid.n_nodes()), 0);
    out.omega.defined.assign(static_cast<std::size_t>(grid.n_nodes()), 0);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.node_x(i), y = grid.node_y(j);
            if (!sol.domain.contains(x, y))
                throw std::invalid_argument("sample: grid node (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ") exits the member domain");
            const int k = grid.node_index(i, j);
            out.u.values[k] = sol.value(x, y);
            out.grad_norm.values[k] = sol.grad_norm(x, y);
            const OmegaSample om = sol.omega(x, y);
            out.omega.omega[k] = static_cast<std::int8_t>(om.defined ? om.sign : 0);
            out.omega.defined[k] = om.defined ? 1 : 0;
        }
    }
    return out;
}

std::pair<ScalarField, NodeMask> sample_w(const ExactSolution& sol, const Grid2D& grid,
                                          double floor) {
    ScalarField w(grid);
    NodeMask valid(static_cast<std::size_t>(grid.n_nodes()), 1);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double g = sol.grad_norm(grid.node_x(i), grid.node_y(j));
            const int k = grid.node_index(i, j);
            if (!(g > floor)) {
                w.values[k] = -std::log(floor);
                valid[k] = 0;
            } else {
                w.values[k] = -std::log(g);
            }
        }
    }
    return {std::move(w), std::move(valid)};
}

double RescaledMember::value(double x, double y) const {
    const double px = x0.x + r * (R[0] * x + R[1] * y);
    const double py = x0.y + r * (R[2] * x + R[3] * y);
    return a * base.value(px, py);
}

Point RescaledMember::grad(double x, double y) const {
    const double px = x0.x + r * (R[0] * x + R[1] * y);
    const double py = x0.y + r * (R[2] * x + R[3] * y);
    const Point g = base.grad(px, py);
    // grad u~ = a r R^T grad u
    return {a * r * (R[0] * g.x + R[2] * g.y), a * r * (R[1] * g.x + R[3] * g.y)};
}

double RescaledMember::grad_norm(double x, double y) const {
    const Point g = grad(x, y);
    return std::hypot(g.x, g.y);
}

double RescaledMember::exact_w(double x, double y) const { return -std::log(grad_norm(x, y)); }

RescaledMember rescale_to_unit(const ExactSolution& sol, Point x0, double delta) {
    RescaledMember m;
    m.base = sol;
    m.x0 = x0;
    const Point g0 = sol.grad(x0.x, x0.y);
    const double n0 = std::hypot(g0.x, g0.y);
    if (!(n0 > 0.0)) throw std::invalid_argument("rescale_to_unit: grad u(x0) = 0");
    const OmegaSample om = sol.omega(x0.x, x0.y);
    const bool flip = om.defined && om.unique && om.sign > 0;

    // Want a r R^T g0 = e2 with a det R < 0 iff flip; R in SO(2).
    // Choose R mapping e2 -> sign * g0/|g0| and a r = sign / |g0|.
    const double sgn = flip ? -1.0 : 1.0;
    const double cx = sgn * g0.x / n0, cy = sgn * g0.y / n0;  // = R e2
    // R = [[cy, cx], [-cx, cy]] maps e2 = (0,1) to (cx, cy); det = 1.
    m.R = {cy, cx, -cx, cy};

    // r from the local Lipschitz scale of grad u so the pinch holds on Q1.
    // Conservative bound via sampled Hessian norm around x0.
    double lip = 0.0;
    const double probe = 1e-4;
    for (int k = 0; k < 4; ++k) {
        const double ang = 0.5 * kPi * k;
        const double px = x0.x + probe * std::cos(ang), py = x0.y + probe * std::sin(ang);
        const Point gp = sol.grad(px, py);
        lip = std::max(lip, std::hypot(gp.x - g0.x, gp.y - g0.y) / probe);
    }
    double r = 1.0;  // fine for members with constant gradient
    if (lip > 1e-12) r = 0.25 * delta * n0 / lip;
    m.r = r;
    m.a = sgn / (r * n0);

    // verify the pinch on Q1 corners and a coarse lattice
    for (int j = 0; j <= 8; ++j)
        for (int i = 0; i <= 8; ++i) {
            const double x = -1.0 + 0.25 * i, y = -1.0 + 0.25 * j;
            const Point g = m.grad(x, y);
            if (std::hypot(g.x, g.y - 1.0) > delta)
                throw std::invalid_argument("rescale_to_unit: pinch violated at (" +
                                            std::to_string(x) + ", " + std::to_string(y) + ")");
        }
    return m;
}

Prop1Problem make_prop1_problem(const ExactSolution& sol, double delta, double sigma,
                                Point x0, int n) {
    if (!(delta > 0.0 && delta < 1.0 / 16.0))
        throw std::invalid_argument("make_prop1_problem: delta must be in (0, 1/16)");
    if (!(sigma >= 0.5 && sigma < 1.0 - 8.0 * delta))
        throw std::invalid_argument("make_prop1_problem: sigma must be in [1/2, 1-8delta)");
    Prop1Problem out;
    out.member = rescale_to_unit(sol, x0, delta);
    out.delta = delta;
    out.sigma = sigma;
    out.lipschitz_bound = delta / std::sqrt((1.0 - sigma) * (1.0 - sigma) - delta * delta);

    const Grid2D g = Grid2D::square(1.0, n);
    const RescaledMember& mem = out.member;

    // pinch check on the actual grid, naming the offending node
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Point gr = mem.grad(g.node_x(i), g.node_y(j));
            if (std::hypot(gr.x, gr.y - 1.0) > delta)
                throw std::invalid_argument("make_prop1_problem: pinch violated at node (" +
                                            std::to_string(i) + ", " + std::to_string(j) + ")");
        }

    // U = {a < u~ - sigma x2 < b}, a/b at (0, -+3/4)
    auto tilde = [&](double x, double y) { return mem.value(x, y) - sigma * y; };
    const double a = tilde(0.0, -0.75);
    const double b = tilde(0.0, 0.75);
    out.problem = DirichletProblem::masked(
        g,
        [&](double x, double y) {
            const double t = tilde(x, y);
            return t > a && t < b;
        },
        [&](double x, double y) { return mem.value(x, y); });
    return out;
}

}  // namespace imcflab
