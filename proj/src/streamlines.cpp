#include "imcflab/streamlines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace imcflab {

namespace {
constexpr double kGradFloor = 1e-8;

struct GradSampler {
    const VectorField g;
    explicit GradSampler(const ScalarField& u) : g(gradient(u)) {}
    Point at(double x, double y) const { return g.interpolate(x, y); }
};
}  // namespace

StreamlinePath trace_streamline(const ScalarField& u, Point start, double step,
                                double max_len, double margin) {
    u.validate("trace_streamline: u");
    if (!(step > 0.0)) throw std::invalid_argument("trace_streamline: step must be > 0");
    const Grid2D& grid = u.grid;
    if (margin < 0.0) margin = 1.5 * grid.h;
    GradSampler gs(u);

    auto dir = [&](double x, double y, bool& ok) -> Point {
        const Point p = gs.at(x, y);
        const double n = std::hypot(p.x, p.y);
        if (n < kGradFloor) {
            ok = false;
            return {0.0, 0.0};
        }
        ok = true;
        return {p.x / n, p.y / n};
    };

    StreamlinePath path;
    {
        bool ok = false;
        dir(start.x, start.y, ok);
        if (!ok)
            throw std::invalid_argument("trace_streamline: |grad u| below floor at start");
    }
    double x = start.x, y = start.y, s = 0.0;
    auto push = [&](double px, double py, double arclen) {
        const Point p = gs.at(px, py);
        path.x.push_back(px);
        path.y.push_back(py);
        path.grad_norm_along.push_back(std::hypot(p.x, p.y));
        path.arclength.push_back(arclen);
    };
    push(x, y, 0.0);
    while (s + step <= max_len) {
        if (grid.boundary_distance(x, y) < margin + step) break;
        bool ok1, ok2, ok3, ok4;
        const Point k1 = dir(x, y, ok1);
        const Point k2 = dir(x + 0.5 * step * k1.x, y + 0.5 * step * k1.y, ok2);
        const Point k3 = dir(x + 0.5 * step * k2.x, y + 0.5 * step * k2.y, ok3);
        const Point k4 = dir(x + step * k3.x, y + step * k3.y, ok4);
        if (!(ok1 && ok2 && ok3 && ok4)) {
            path.truncated = true;
            break;
        }
        x += step / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
        y += step / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
        s += step;
        push(x, y, s);
    }
    return path;
}

Polyline trace_level_set(const ScalarField& u, double level, Point seed, double step,
                         double max_len, bool forward, double margin) {
    u.validate("trace_level_set: u");
    const Grid2D& grid = u.grid;
    if (margin < 0.0) margin = 1.5 * grid.h;
    GradSampler gs(u);

    auto project = [&](double& x, double& y) {
        for (int it = 0; it < 20; ++it) {
            const double f = u.interpolate(x, y) - level;
            const Point g = gs.at(x, y);
            const double n2 = g.x * g.x + g.y * g.y;
            if (n2 < kGradFloor * kGradFloor)
                throw std::runtime_error("trace_level_set: gradient vanished on the curve");
            if (std::abs(f) <= 1e-13 * (1.0 + std::abs(level))) return;
            x -= g.x * f / n2;
            y -= g.y * f / n2;
        }
        const double f = u.interpolate(x, y) - level;
        if (std::abs(f) > 1e-9 * (1.0 + std::abs(level)))
            throw std::runtime_error("trace_level_set: corrector failed to converge");
    };

    if (std::abs(u.interpolate(seed.x, seed.y) - level) >
        std::abs(level) * 1e-6 + 4.0 * grid.h)
        throw std::invalid_argument("trace_level_set: seed too far from the level set");

    Polyline out;
    double x = seed.x, y = seed.y;
    project(x, y);
    out.x.push_back(x);
    out.y.push_back(y);
    double s = 0.0;
    const double sgn = forward ? 1.0 : -1.0;
    while (s + step <= max_len) {
        if (grid.boundary_distance(x, y) < margin + step) break;
        const Point g = gs.at(x, y);
        const double n = std::hypot(g.x, g.y);
        if (n < kGradFloor) break;
        // predictor along perp(grad u) = (-gy, gx)
        double px = x + sgn * step * (-g.y / n);
        double py = y + sgn * step * (g.x / n);
        project(px, py);
        x = px;
        y = py;
        s += step;
        out.x.push_back(x);
        out.y.push_back(y);
    }
    return out;
}

OrientationField detect_orientation(const ScalarField& u, const ScalarField& grad_norm,
                                    double r) {
    u.validate("detect_orientation: u");
    grad_norm.validate("detect_orientation: grad_norm");
    const Grid2D& grid = u.grid;
    if (r < 2.0 * grid.h)
        throw std::invalid_argument("detect_orientation: r must be at least 2h");
    constexpr double kSlack = 1e-6;

    GradSampler gs(u);
    OrientationField of;
    of.grid = grid;
    of.omega.assign(static_cast<std::size_t>(grid.n_nodes()), 0);
    of.defined.assign(static_cast<std::size_t>(grid.n_nodes()), 0);

    const double step = 0.5 * grid.h;
    const int nsteps = std::max(2, static_cast<int>(std::floor(r / step)));
    const double margin = 1.5 * grid.h;

    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double x0 = grid.node_x(i), y0 = grid.node_y(j);
            if (grid.boundary_distance(x0, y0) < margin + step) continue;
            const Point g0 = gs.at(x0, y0);
            if (std::hypot(g0.x, g0.y) < kGradFloor) continue;
            const double level = u.interpolate(x0, y0);

            // sample g along the local level set, oriented by perp(grad u)(x0)
            std::vector<double> samples;
            samples.reserve(2 * nsteps + 1);
            bool ok = true;
            auto march = [&](double sgn, std::vector<double>& dst) {
                double x = x0, y = y0;
                for (int k = 0; k < nsteps; ++k) {
                    if (grid.boundary_distance(x, y) < margin + step) {
                        ok = false;
                        return;
                    }
                    const Point g = gs.at(x, y);
                    const double n = std::hypot(g.x, g.y);
                    if (n < kGradFloor) {
                        ok = false;
                        return;
                    }
                    double px = x + sgn * step * (-g.y / n);
                    double py = y + sgn * step * (g.x / n);
                    // corrector
                    bool proj_ok = false;
                    for (int it = 0; it < 20; ++it) {
                        const double f = u.interpolate(px, py) - level;
                        const Point gg = gs.at(px, py);
                        const double n2 = gg.x * gg.x + gg.y * gg.y;
                        if (n2 < kGradFloor * kGradFloor) break;
                        if (std::abs(f) <= 1e-12) {
                            proj_ok = true;
                            break;
                        }
                        px -= gg.x * f / n2;
                        py -= gg.y * f / n2;
                        proj_ok = true;
                    }
                    if (!proj_ok) {
                        ok = false;
                        return;
                    }
                    x = px;
                    y = py;
                    dst.push_back(grad_norm.interpolate(x, y));
                }
            };
            std::vector<double> fwd, bwd;
            march(+1.0, fwd);
            if (ok) march(-1.0, bwd);
            if (!ok) continue;
            for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) samples.push_back(*it);
            samples.push_back(grad_norm.interpolate(x0, y0));
            for (double v : fwd) samples.push_back(v);

            bool nondec = true, noninc = true;
            for (std::size_t k = 1; k < samples.size(); ++k) {
                if (samples[k] < samples[k - 1] - kSlack) nondec = false;
                if (samples[k] > samples[k - 1] + kSlack) noninc = false;
            }
            const int idx = grid.node_index(i, j);
            if (nondec) {  // ties break to +1
                of.omega[idx] = 1;
                of.defined[idx] = 1;
            } else if (noninc) {
                of.omega[idx] = -1;
                of.defined[idx] = 1;
            }
        }
    }

    // continuity pass: undefine nodes that contradict an already-kept neighbor
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const int k = grid.node_index(i, j);
            if (!of.defined[k]) continue;
            if (i > 0) {
                const int l = grid.node_index(i - 1, j);
                if (of.defined[l] && of.omega[l] != of.omega[k]) {
                    of.defined[k] = 0;
                    of.omega[k] = 0;
                    continue;
                }
            }
            if (j > 0) {
                const int l = grid.node_index(i, j - 1);
                if (of.defined[l] && of.omega[l] != of.omega[k]) {
                    of.defined[k] = 0;
                    of.omega[k] = 0;
                }
            }
        }
    }
    return of;
}

LevelSetFamily build_level_family(const ScalarField& u,
                                  const std::function<double(double)>& m, double delta,
                                  int n_levels) {
    u.validate("build_level_family: u");
    const Grid2D& grid = u.grid;
    const VectorField g = gradient(u);
    for (int c = 0; c < grid.n_cells(); ++c) {
        const double dx = g.fx[c], dy = g.fy[c] - 1.0;
        if (std::hypot(dx, dy) > delta + 1e-9) {
            throw std::invalid_argument("build_level_family: gradient pinch violated at cell " +
                                        std::to_string(c));
        }
    }

    LevelSetFamily fam;
    const double step = 0.5 * grid.h;
    for (int k = 0; k < n_levels; ++k) {
        const double t = -0.5 + k * (1.0 / (n_levels - 1));
        fam.t_values.push_back(t);
        fam.m_t.push_back(m(t));
        const double level = u.interpolate(0.0, t);
        Polyline right = trace_level_set(u, level, {0.0, t}, step, 4.0, true);
        Polyline left = trace_level_set(u, level, {0.0, t}, step, 4.0, false);
        Polyline curve;
        for (std::size_t q = left.size(); q-- > 1;) {
            curve.x.push_back(left.x[q]);
            curve.y.push_back(left.y[q]);
        }
        for (std::size_t q = 0; q < right.size(); ++q) {
            curve.x.push_back(right.x[q]);
            curve.y.push_back(right.y[q]);
        }
        fam.curves.push_back(std::move(curve));
    }

    // rasterize M: invert t per cell through the x1 = 0 column profile
    fam.M.assign(static_cast<std::size_t>(grid.n_cells()), 0);
    auto t_of_value = [&](double val) -> double {
        // u(0, t) is strictly increasing in t (pinch); bisect on t in [-1/2, 1/2]
        double lo = -0.5, hi = 0.5;
        double flo = u.interpolate(0.0, lo) - val;
        double fhi = u.interpolate(0.0, hi) - val;
        if (flo > 0.0 || fhi < 0.0) return std::numeric_limits<double>::quiet_NaN();
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double f = u.interpolate(0.0, mid) - val;
            if (f <= 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    for (int cj = 0; cj < grid.cells_y(); ++cj) {
        for (int ci = 0; ci < grid.cells_x(); ++ci) {
            const double cx = grid.cell_cx(ci), cy = grid.cell_cy(cj);
            const double val = u.interpolate(cx, cy);
            const double t = t_of_value(val);
            if (!std::isfinite(t)) continue;
            if (cx <= m(t)) fam.M[grid.cell_index(ci, cj)] = 1;
        }
    }
    return fam;
}

double directed_hausdorff(const Polyline& a, const Polyline& b) {
    if (a.size() == 0 || b.size() < 2) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j + 1 < b.size(); ++j) {
            const double ex = b.x[j + 1] - b.x[j], ey = b.y[j + 1] - b.y[j];
            const double dx = a.x[i] - b.x[j], dy = a.y[i] - b.y[j];
            const double L2 = ex * ex + ey * ey;
            double t = L2 > 0 ? (dx * ex + dy * ey) / L2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double qx = dx - t * ex, qy = dy - t * ey;
            best = std::min(best, std::hypot(qx, qy));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace imcflab
