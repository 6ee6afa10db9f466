#include "imcflab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "imcflab/kernels.hpp"

namespace imcflab {

Grid2D::Grid2D(double x0_, double y0_, double h_, int nx_, int ny_)
    : x0(x0_), y0(y0_), h(h_), nx(nx_), ny(ny_) {
    if (!(h > 0.0)) throw std::invalid_argument("Grid2D: h must be > 0");
    if (nx < 3 || ny < 3) throw std::invalid_argument("Grid2D: nx, ny must be >= 3");
}

Grid2D Grid2D::square(double r, int n) {
    return Grid2D(-r, -r, 2.0 * r / (n - 1), n, n);
}

double Grid2D::boundary_distance(double x, double y) const {
    const double d = std::min(std::min(x - x0, xmax() - x), std::min(y - y0, ymax() - y));
    return d;
}

bool Grid2D::same_as(const Grid2D& o, double tol) const {
    return nx == o.nx && ny == o.ny && std::abs(x0 - o.x0) <= tol &&
           std::abs(y0 - o.y0) <= tol && std::abs(h - o.h) <= tol;
}

ScalarField::ScalarField(const Grid2D& g, double fill)
    : grid(g), values(static_cast<std::size_t>(g.n_nodes()), fill) {}

void ScalarField::validate(const char* what) const {
    if (static_cast<int>(values.size()) != grid.n_nodes())
        throw std::invalid_argument(std::string(what) + ": wrong length");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) {
            const int i = static_cast<int>(k) % grid.nx;
            const int j = static_cast<int>(k) / grid.nx;
            throw std::invalid_argument(std::string(what) + ": non-finite value at node (" +
                                        std::to_string(i) + ", " + std::to_string(j) + ")");
        }
    }
}

double ScalarField::interpolate(double x, double y) const {
    double fx = (x - grid.x0) / grid.h;
    double fy = (y - grid.y0) / grid.h;
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    i = std::clamp(i, 0, grid.nx - 2);
    j = std::clamp(j, 0, grid.ny - 2);
    const double tx = std::clamp(fx - i, 0.0, 1.0);
    const double ty = std::clamp(fy - j, 0.0, 1.0);
    const double v00 = at(i, j), v10 = at(i + 1, j);
    const double v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
    return (1 - ty) * ((1 - tx) * v00 + tx * v10) + ty * ((1 - tx) * v01 + tx * v11);
}

VectorField::VectorField(const Grid2D& g, double vx, double vy)
    : grid(g),
      fx(static_cast<std::size_t>(g.n_cells()), vx),
      fy(static_cast<std::size_t>(g.n_cells()), vy) {}

void VectorField::validate(const char* what) const {
    if (static_cast<int>(fx.size()) != grid.n_cells() ||
        static_cast<int>(fy.size()) != grid.n_cells())
        throw std::invalid_argument(std::string(what) + ": wrong length");
    for (std::size_t k = 0; k < fx.size(); ++k)
        if (!std::isfinite(fx[k]) || !std::isfinite(fy[k]))
            throw std::invalid_argument(std::string(what) + ": non-finite component at cell " +
                                        std::to_string(k));
}

Point VectorField::interpolate(double x, double y) const {
    // cell centers form a (nx-1) x (ny-1) lattice offset by h/2
    const double h = grid.h;
    double fxi = (x - grid.x0) / h - 0.5;
    double fyi = (y - grid.y0) / h - 0.5;
    int i = static_cast<int>(std::floor(fxi));
    int j = static_cast<int>(std::floor(fyi));
    i = std::clamp(i, 0, grid.cells_x() - 2);
    j = std::clamp(j, 0, grid.cells_y() - 2);
    const double tx = std::clamp(fxi - i, 0.0, 1.0);
    const double ty = std::clamp(fyi - j, 0.0, 1.0);
    const int cw = grid.cells_x();
    auto lerp = [&](const std::vector<double>& f) {
        const double v00 = f[j * cw + i], v10 = f[j * cw + i + 1];
        const double v01 = f[(j + 1) * cw + i], v11 = f[(j + 1) * cw + i + 1];
        return (1 - ty) * ((1 - tx) * v00 + tx * v10) + ty * ((1 - tx) * v01 + tx * v11);
    };
    return {lerp(fx), lerp(fy)};
}

double VectorField::max_norm(const CellMask* mask) const {
    double m = 0.0;
    for (std::size_t k = 0; k < fx.size(); ++k) {
        if (mask && !(*mask)[k]) continue;
        m = std::max(m, std::hypot(fx[k], fy[k]));
    }
    return m;
}

double TestFunction::value(double x, double y) const {
    const double t = ((x - center.x) * (x - center.x) + (y - center.y) * (y - center.y)) /
                     (radius * radius);
    if (t >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t));
}

Point TestFunction::gradient(double x, double y) const {
    const double dx = x - center.x, dy = y - center.y;
    const double t = (dx * dx + dy * dy) / (radius * radius);
    if (t >= 1.0) return {0.0, 0.0};
    const double e = std::exp(1.0 - 1.0 / (1.0 - t));
    const double f = -e / ((1.0 - t) * (1.0 - t)) * 2.0 / (radius * radius);
    return {f * dx, f * dy};
}

double TestFunction::laplacian(double x, double y) const {
    const double dx = x - center.x, dy = y - center.y;
    const double t = (dx * dx + dy * dy) / (radius * radius);
    if (t >= 1.0) return 0.0;
    const double s = 1.0 / (1.0 - t);
    const double e = std::exp(1.0 - s);
    // laplacian = e * [(f'^2 + f'') |grad t|^2 + f' lap t], f = 1 - s
    return (4.0 * e / (radius * radius)) * (t * s * s * s * (s - 2.0) - s * s);
}

bool TestFunction::supported_inside(const Grid2D& g, double margin) const {
    return g.boundary_distance(center.x, center.y) > radius + margin;
}

VectorField gradient(const ScalarField& u) {
    u.validate("gradient: input");
    VectorField g(u.grid);
    if (kernels::parallel_enabled())
        kernels::parallel::cell_gradient(u.grid.nx, u.grid.ny, u.grid.h, u.values.data(),
                                         g.fx.data(), g.fy.data());
    else
        kernels::serial::cell_gradient(u.grid.nx, u.grid.ny, u.grid.h, u.values.data(),
                                       g.fx.data(), g.fy.data());
    return g;
}

VectorField perp(const VectorField& g) {
    g.validate("perp: input");
    VectorField out(g.grid);
    for (std::size_t k = 0; k < g.fx.size(); ++k) {
        out.fx[k] = -g.fy[k];
        out.fy[k] = g.fx[k];
    }
    return out;
}

double integrate(const ScalarField& s, const CellMask* mask) {
    s.validate("integrate: input");
    const std::vector<double> cv = nodes_to_cells(s);
    return integrate_cells(s.grid, cv, mask);
}

double integrate_cells(const Grid2D& g, std::span<const double> cell_values,
                       const CellMask* mask) {
    if (static_cast<int>(cell_values.size()) != g.n_cells())
        throw std::invalid_argument("integrate_cells: wrong length");
    std::vector<double> terms;
    terms.reserve(cell_values.size());
    const double h2 = g.h * g.h;
    for (std::size_t k = 0; k < cell_values.size(); ++k) {
        if (mask && !(*mask)[k]) continue;
        terms.push_back(h2 * cell_values[k]);
    }
    return kernels::det_sum(terms);
}

std::vector<double> weak_divergence_residual(const VectorField& F, const ScalarField& s,
                                             const std::vector<TestFunction>& tests,
                                             const CellMask* mask) {
    F.validate("weak_divergence_residual: F");
    s.validate("weak_divergence_residual: s");
    if (!F.grid.same_as(s.grid))
        throw std::invalid_argument("weak_divergence_residual: grid mismatch");
    for (std::size_t t = 0; t < tests.size(); ++t)
        if (!tests[t].supported_inside(F.grid))
            throw std::invalid_argument("weak_divergence_residual: test " + std::to_string(t) +
                                        " support exits the grid interior");
    const Grid2D& g = F.grid;
    const std::vector<double> sc = nodes_to_cells(s);
    const int cw = g.cells_x(), ch = g.cells_y();
    std::vector<double> out(tests.size(), 0.0);
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
    for (long t = 0; t < static_cast<long>(tests.size()); ++t) {
        const TestFunction& eta = tests[t];
        // restrict the loop to the support's bounding box
        int i0 = std::max(0, static_cast<int>((eta.center.x - eta.radius - g.x0) / g.h) - 1);
        int i1 = std::min(cw, static_cast<int>((eta.center.x + eta.radius - g.x0) / g.h) + 2);
        int j0 = std::max(0, static_cast<int>((eta.center.y - eta.radius - g.y0) / g.h) - 1);
        int j1 = std::min(ch, static_cast<int>((eta.center.y + eta.radius - g.y0) / g.h) + 2);
        std::vector<double> terms;
        terms.reserve(static_cast<std::size_t>(std::max(0, i1 - i0)) *
                      static_cast<std::size_t>(std::max(0, j1 - j0)));
        const double h2 = g.h * g.h;
        for (int j = j0; j < j1; ++j) {
            for (int i = i0; i < i1; ++i) {
                const int c = g.cell_index(i, j);
                if (mask && !(*mask)[c]) continue;
                const double cx = g.cell_cx(i), cy = g.cell_cy(j);
                const Point ge = eta.gradient(cx, cy);
                const double ev = eta.value(cx, cy);
                terms.push_back(h2 * (F.fx[c] * ge.x + F.fy[c] * ge.y + ev * sc[c]));
            }
        }
        out[t] = kernels::serial::det_sum(terms);
    }
    return out;
}

ScalarField cells_to_nodes(const Grid2D& g, std::span<const double> cell_values,
                           const CellMask* mask) {
    if (static_cast<int>(cell_values.size()) != g.n_cells())
        throw std::invalid_argument("cells_to_nodes: wrong length");
    ScalarField out(g);
    const int cw = g.cells_x(), ch = g.cells_y();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double acc = 0.0;
            int cnt = 0;
            for (int dj = -1; dj <= 0; ++dj) {
                for (int di = -1; di <= 0; ++di) {
                    const int ci = i + di, cj = j + dj;
                    if (ci < 0 || cj < 0 || ci >= cw || cj >= ch) continue;
                    const int c = g.cell_index(ci, cj);
                    if (mask && !(*mask)[c]) continue;
                    acc += cell_values[c];
                    ++cnt;
                }
            }
            out.values[g.node_index(i, j)] = cnt ? acc / cnt : 0.0;
        }
    }
    return out;
}

std::vector<double> nodes_to_cells(const ScalarField& s) {
    const Grid2D& g = s.grid;
    std::vector<double> out(static_cast<std::size_t>(g.n_cells()));
    const int cw = g.cells_x();
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
    for (int j = 0; j < g.cells_y(); ++j) {
        for (int i = 0; i < cw; ++i) {
            out[j * cw + i] = 0.25 * (s.at(i, j) + s.at(i + 1, j) + s.at(i, j + 1) +
                                      s.at(i + 1, j + 1));
        }
    }
    return out;
}

std::vector<double> cell_norms(const VectorField& F) {
    std::vector<double> out(F.fx.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::hypot(F.fx[k], F.fy[k]);
    return out;
}

}  // namespace imcflab
