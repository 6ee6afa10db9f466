#include "imcflab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "imcflab/kernels.hpp"

namespace imcflab {

namespace {
constexpr double kPi = std::numbers::pi;

double fit_slope_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

DirichletProblem angle_sector_problem(int n) {
    Grid2D g(0.0, 0.0, 2.0 / (n - 1), n, n);
    return DirichletProblem::masked(
        g,
        [](double x, double y) {
            const double r = std::hypot(x, y);
            return r >= 0.5 - 1e-12 && r <= 2.0 + 1e-12;
        },
        [](double x, double y) { return -std::atan2(y, x); });
}

Point angle_sector_anchor(const DirichletProblem& pr) {
    const Grid2D& g = pr.grid;
    const double target = (2.0 - 1.5 * g.h) / std::sqrt(2.0);
    int ai = static_cast<int>(std::llround((target - g.x0) / g.h));
    int aj = ai;
    while (ai > 0 && aj > 0) {
        const double x = g.node_x(ai), y = g.node_y(aj);
        if (std::hypot(x, y) <= 2.0 - 0.5 * g.h &&
            pr.state[g.node_index(ai, aj)] != NodeState::Exterior)
            return {x, y};
        --ai;
        --aj;
    }
    throw std::runtime_error("angle_sector_anchor: no active diagonal node found");
}

namespace {

struct PipelineStep {
    SolveResult solved;
    ConjugatePair pair;
    TransformedField transformed;
};

PipelineStep run_pipeline_once(const DirichletProblem& pr, double p, double gamma,
                               Point anchor, double eps_min, const NodeMask* region) {
    PipelineStep st;
    st.solved = solve(pr, SolveParams::default_for(p, eps_min));
    st.pair = conjugate(st.solved.u, PExponent::of(p), gamma, anchor, &pr.active);
    st.transformed = log_transform(st.pair, region);
    return st;
}

}  // namespace

Prop1Outcome run_prop1(const ExactSolution& sol, const Prop1Params& params,
                       bool force_rescaled) {
    if (!sol.globally_orientable) {
        // No global orientation: the approximation hypothesis fails and the
        // exact pair is certified directly (expected verdict: fail on the axes).
        Prop1Outcome out;
        out.sweep.member = sol.name;
        out.sweep.geometry = "square";
        out.sweep.n = params.n;
        AronssonParams ap;
        ap.grid_ns = {params.n};
        ap.seed = params.seed;
        ap.tol = params.tol;
        const AronssonReport ar = run_aronsson_discrimination(ap);
        out.limit_certificate.pass = !ar.full_square_fails;
        out.limit_certificate.thresholds = params.tol;
        out.limit_certificate.failure = ar.failing_tests;
        out.pass = false;
        out.detail = "certificate fails on axis-centered tests (no global orientation)";
        return out;
    }
    const bool sector = (sol.domain.kind == Domain::Kind::AnnularSector) && !force_rescaled;
    Prop1Outcome out;
    SweepReport& rep = out.sweep;
    rep.member = sol.name;
    rep.geometry = sector ? "sector" : "slab";
    rep.n = params.n;
    rep.gamma = params.gamma;

    DirichletProblem pr;
    Point anchor;
    std::optional<RescaledMember> rescaled;
    if (sector) {
        pr = angle_sector_problem(params.n);
        anchor = angle_sector_anchor(pr);
    } else {
        Point x0{0.0, 0.0};
        if (sol.domain.kind == Domain::Kind::AnnularSector) x0 = {1.5, 0.0};
        Prop1Problem p1 = make_prop1_problem(sol, params.delta, params.sigma, x0, params.n);
        pr = p1.problem;
        rescaled = p1.member;
        anchor = {-0.75, 0.0};
    }
    const Grid2D& g = pr.grid;

    // reference fields (the sector radius is floored so exterior nodes of the
    // bounding box, never used in masked quadrature, still carry finite values)
    auto ref_w = [&](double x, double y) {
        if (sector) return std::log(std::max(1e-12, std::hypot(x, y)));
        return rescaled->exact_w(x, y);
    };
    auto ref_u = [&](double x, double y) {
        if (sector) return -std::atan2(y, x);
        return rescaled->value(x, y);
    };
    auto ref_grad = [&](double x, double y) -> Point {
        if (sector) {
            const double r2 = x * x + y * y;
            return {y / r2, -x / r2};
        }
        return rescaled->grad(x, y);
    };

    // report region: sector -> interior compactum cells; slab -> Q_{1/4} cells
    CellMask report_cells(static_cast<std::size_t>(g.n_cells()), 0);
    for (int cj = 0; cj < g.cells_y(); ++cj)
        for (int ci = 0; ci < g.cells_x(); ++ci) {
            const double x = g.cell_cx(ci), y = g.cell_cy(cj);
            bool in;
            if (sector) {
                const double r = std::hypot(x, y);
                in = r > 0.65 && r < 1.85 && x > 0.15 && y > 0.15;
            } else {
                in = std::abs(x) < 0.25 && std::abs(y) < 0.25;
            }
            report_cells[g.cell_index(ci, cj)] = (in && pr.active[g.cell_index(ci, cj)]) ? 1 : 0;
        }

    // transform region (v > 0 required): sector -> inside the anchor radius
    // (the far sliver beyond the anchor is where the normalization floor can
    // be undercut); slab -> x >= -5/8, |y| <= 1/2.
    NodeMask region(static_cast<std::size_t>(g.n_nodes()), 0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double x = g.node_x(i), y = g.node_y(j);
            bool in;
            if (sector)
                in = std::hypot(x, y) <= 1.90;
            else
                in = x >= -0.625 && std::abs(y) <= 0.5;
            region[g.node_index(i, j)] = in ? 1 : 0;
        }

    const double rho_check = sector ? 0.1 : 0.2;
    std::vector<double> l1s, ps;
    std::vector<ScalarField> w_fields;
    std::vector<NodeMask> w_valids;
    rep.all_converged = true;
    for (double p : params.p_values) {
        PipelineStep st =
            run_pipeline_once(pr, p, params.gamma, anchor, params.eps_min, &region);
        SweepRecord rec;
        rec.p = p;
        rec.epsilon = st.solved.stages.back().epsilon;
        rec.iterations = st.solved.iterations;
        rec.converged = st.solved.converged;
        rec.energy = st.solved.energy;
        rep.all_converged = rep.all_converged && rec.converged;
        auto [lhs, rhs] = interior_sup_gradient_check(st.solved, rho_check, PExponent::of(p));
        rec.sup_grad_interior = lhs;
        rec.sup_grad_bound = rhs;
        rec.min_vertical = vertical_monotonicity_check(st.solved);

        // metrics vs the reference on report cells
        const ScalarField& w = st.transformed.w;
        std::vector<double> diff_cells(static_cast<std::size_t>(g.n_cells()), 0.0);
        double one_sided = 1e300, supw = 0.0;
        CellMask metric_cells = report_cells;
        for (int cj = 0; cj < g.cells_y(); ++cj)
            for (int ci = 0; ci < g.cells_x(); ++ci) {
                const int c = g.cell_index(ci, cj);
                if (!metric_cells[c]) continue;
                const int n4[4] = {g.node_index(ci, cj), g.node_index(ci + 1, cj),
                                   g.node_index(ci, cj + 1), g.node_index(ci + 1, cj + 1)};
                bool ok = true;
                for (int q = 0; q < 4; ++q) ok = ok && st.transformed.w_valid[n4[q]];
                if (!ok) {
                    metric_cells[c] = 0;
                    continue;
                }
                double wc = 0.0, wr = 0.0;
                for (int q = 0; q < 4; ++q) {
                    const int i = q % 2 ? ci + 1 : ci;
                    const int j = q / 2 ? cj + 1 : cj;
                    wc += 0.25 * w.values[n4[q]];
                    wr += 0.25 * ref_w(g.node_x(i), g.node_y(j));
                }
                diff_cells[c] = wc - wr;
                one_sided = std::min(one_sided, wr - wc);
                supw = std::max(supw, std::abs(wc - wr));
            }
        if (sector) {
            // criterion metric: || w_p - (log r + c_p) ||_L1 with fitted c_p
            std::vector<double> ds;
            for (int c = 0; c < g.n_cells(); ++c)
                if (metric_cells[c]) ds.push_back(diff_cells[c]);
            const double cp = median(ds);
            std::vector<double> absd(static_cast<std::size_t>(g.n_cells()), 0.0);
            for (int c = 0; c < g.n_cells(); ++c)
                if (metric_cells[c]) absd[c] = std::abs(diff_cells[c] - cp);
            rec.l1_distance = integrate_cells(g, absd, &metric_cells);
        } else {
            std::vector<double> absd(static_cast<std::size_t>(g.n_cells()), 0.0);
            for (int c = 0; c < g.n_cells(); ++c)
                if (metric_cells[c]) absd[c] = std::abs(diff_cells[c]);
            rec.l1_distance = integrate_cells(g, absd, &metric_cells);
        }
        rec.one_sided_min = one_sided;
        rec.sup_w_error = supw;

        double sup_u = 0.0;
        for (int k = 0; k < g.n_nodes(); ++k) {
            if (pr.state[k] != NodeState::Unknown) continue;
            const int i = k % g.nx, j = k / g.nx;
            sup_u = std::max(sup_u,
                             std::abs(st.solved.u.values[k] - ref_u(g.node_x(i), g.node_y(j))));
        }
        rec.sup_u_error = sup_u;

        rep.records.push_back(rec);
        ps.push_back(p);
        l1s.push_back(rec.l1_distance);
        w_fields.push_back(w);
        w_valids.push_back(st.transformed.w_valid);
        if (p == params.p_values.back()) {
            // largest-p certificate (reported, not gated)
            std::vector<TestFunction> tests = make_test_suite(
                g, 24, params.seed + 17, 0.10, 0.3, [&](double x, double y) {
                    if (sector) {
                        const double r = std::hypot(x, y);
                        return std::min(std::min(r - 0.5, 1.85 - r), std::min(x, y));
                    }
                    return 0.5 - std::max(std::abs(x), std::abs(y));
                });
            CellMask cm(static_cast<std::size_t>(g.n_cells()), 0);
            for (int c = 0; c < g.n_cells(); ++c)
                cm[c] = st.transformed.f_valid[c];
            out.finite_p_certificate =
                certify(st.transformed.w, st.transformed.F, tests, params.tol, &cm);
            out.v_last = st.pair.v;
            out.w_last = st.transformed.w;
            out.F_last = st.transformed.F;
        }
    }

    rep.l1_slope = fit_slope_loglog(ps, l1s);
    rep.l1_decreasing = true;
    for (std::size_t i = 1; i < l1s.size(); ++i)
        rep.l1_decreasing = rep.l1_decreasing && l1s[i] < l1s[i - 1];

    // gauge-modded consecutive distances
    for (std::size_t i = 1; i < w_fields.size(); ++i) {
        std::vector<double> ds;
        std::vector<double> cellvals(static_cast<std::size_t>(g.n_cells()), 0.0);
        CellMask cm = report_cells;
        for (int cj = 0; cj < g.cells_y(); ++cj)
            for (int ci = 0; ci < g.cells_x(); ++ci) {
                const int c = g.cell_index(ci, cj);
                if (!cm[c]) continue;
                const int n4[4] = {g.node_index(ci, cj), g.node_index(ci + 1, cj),
                                   g.node_index(ci, cj + 1), g.node_index(ci + 1, cj + 1)};
                bool ok = true;
                for (int q = 0; q < 4; ++q)
                    ok = ok && w_valids[i][n4[q]] && w_valids[i - 1][n4[q]];
                if (!ok) {
                    cm[c] = 0;
                    continue;
                }
                double d = 0.0;
                for (int q = 0; q < 4; ++q)
                    d += 0.25 * (w_fields[i].values[n4[q]] - w_fields[i - 1].values[n4[q]]);
                cellvals[c] = d;
                ds.push_back(d);
            }
        const double cp = median(ds);
        std::vector<double> absd(static_cast<std::size_t>(g.n_cells()), 0.0);
        for (int c = 0; c < g.n_cells(); ++c)
            if (cm[c]) absd[c] = std::abs(cellvals[c] - cp);
        rep.consecutive_l1.push_back(integrate_cells(g, absd, &cm));
    }
    rep.consecutive_decreasing = true;
    for (std::size_t i = 1; i < rep.consecutive_l1.size(); ++i)
        rep.consecutive_decreasing =
            rep.consecutive_decreasing && rep.consecutive_l1[i] < rep.consecutive_l1[i - 1];

    rep.one_sided_ok = true;
    if (!sector) {
        for (const auto& rec : rep.records)
            rep.one_sided_ok =
                rep.one_sided_ok && rec.one_sided_min >= -prop1_slack(rec.p);
    }

    // limit certificate: exact pair (w_ref, F = e^{w_ref} perp(grad u_ref))
    {
        ScalarField w_lim(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                w_lim.values[g.node_index(i, j)] = ref_w(g.node_x(i), g.node_y(j));
        VectorField F_lim(g);
        for (int cj = 0; cj < g.cells_y(); ++cj)
            for (int ci = 0; ci < g.cells_x(); ++ci) {
                const double x = g.cell_cx(ci), y = g.cell_cy(cj);
                const Point gr = ref_grad(x, y);
                const double ew = std::exp(ref_w(x, y));
                const int c = g.cell_index(ci, cj);
                F_lim.fx[c] = ew * (-gr.y);
                F_lim.fy[c] = ew * (gr.x);
            }
        std::vector<TestFunction> tests = make_test_suite(
            g, 24, params.seed, sector ? 0.10 : 0.15, 0.3, [&](double x, double y) {
                if (sector) {
                    const double r = std::hypot(x, y);
                    return std::min(std::min(r - 0.5, 2.0 - r), std::min(x, y));
                }
                return 0.5 - std::max(std::abs(x), std::abs(y));
            });
        out.limit_certificate = certify(w_lim, F_lim, tests, params.tol, &pr.active);
    }

    out.pass = rep.all_converged && rep.l1_decreasing && rep.one_sided_ok &&
               out.limit_certificate.pass;
    if (!out.pass) {
        out.detail = !rep.all_converged        ? "a solve did not converge"
                     : !rep.l1_decreasing      ? "L1 distances not decreasing in p"
                     : !rep.one_sided_ok       ? "one-sided bound violated beyond slack"
                                               : "limit certificate failed";
    }
    return out;
}

Lemma42Report run_lemma42(const ExactSolution& sol, const Polyline& curve,
                          const Lemma42Params& params) {
    if (curve.size() < 2) throw std::invalid_argument("run_lemma42: degenerate curve");
    const bool sector = sol.domain.kind == Domain::Kind::AnnularSector;

    DirichletProblem pr;
    Point anchor;
    if (sector) {
        pr = angle_sector_problem(params.n);
        anchor = angle_sector_anchor(pr);
    } else {
        Prop1Problem p1 = make_prop1_problem(sol, 0.05, 0.5, {0.0, 0.0}, params.n);
        pr = p1.problem;
        anchor = {-0.75, 0.0};
    }
    const Grid2D& g = pr.grid;

    // curve geometry: bounds from the analytic member (in problem coordinates,
    // the worked field is -u for positively oriented members)
    auto grad_ref = [&](double x, double y) -> Point {
        if (sector) {
            const double r2 = x * x + y * y;
            return {y / r2, -x / r2};
        }
        const Point gr = sol.grad(x, y);
        return gr;
    };
    double sup_g = 0.0, mean_perp = 0.0, total_len = 0.0;
    for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
        const double mx = 0.5 * (curve.x[k] + curve.x[k + 1]);
        const double my = 0.5 * (curve.y[k] + curve.y[k + 1]);
        const double ex = curve.x[k + 1] - curve.x[k], ey = curve.y[k + 1] - curve.y[k];
        const double len = std::hypot(ex, ey);
        const Point gr = grad_ref(mx, my);
        sup_g = std::max(sup_g, std::hypot(gr.x, gr.y));
        // (lambda')^perp = (-ey, ex)/len
        mean_perp += (-ey * gr.x + ex * gr.y);
        total_len += len;
    }
    mean_perp /= total_len;
    if (mean_perp < 0.25)
        throw std::invalid_argument(
            "run_lemma42: curve is not transversal enough ((lambda')^perp . grad u < 1/4)");

    const Point x_end{curve.x.front(), curve.y.front()};
    const Point y_end{curve.x.back(), curve.y.back()};

    Lemma42Report rep;
    for (double p : params.p_values) {
        SolveResult solved = solve(pr, SolveParams::default_for(p, params.eps_min));
        ConjugatePair pair =
            conjugate(solved.u, PExponent::of(p), params.gamma, anchor, &pr.active);
        // disk extrema of v over defined nodes
        auto disk_extrema = [&](Point c) {
            double lo = 1e300, hi = -1e300;
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const int k = g.node_index(i, j);
                    if (!pair.v_defined[k]) continue;
                    if (std::hypot(g.node_x(i) - c.x, g.node_y(j) - c.y) > params.rho)
                        continue;
                    lo = std::min(lo, pair.v.values[k]);
                    hi = std::max(hi, pair.v.values[k]);
                }
            if (lo > hi) throw std::runtime_error("run_lemma42: empty endpoint disk");
            return std::pair<double, double>{lo, hi};
        };
        const auto [x_lo, x_hi] = disk_extrema(x_end);
        const auto [y_lo, y_hi] = disk_extrema(y_end);
        Lemma42Row row;
        row.p = p;
        const double s = 1.0 / (p - 1.0);
        row.upper_quantity = y_lo - x_hi > 0.0 ? std::pow(y_lo - x_hi, s) : 0.0;
        row.lower_quantity = y_hi - x_lo > 0.0 ? std::pow(y_hi - x_lo, s) : 0.0;
        row.sup_bound = sup_g;
        row.mean_bound = mean_perp;
        rep.rows.push_back(row);
    }
    const Lemma42Row& last = rep.rows.back();
    rep.upper_ok = last.upper_quantity <= last.sup_bound + params.slack;
    rep.lower_ok = last.lower_quantity >= last.mean_bound - params.slack;
    return rep;
}

Theorem2Report run_theorem2(const ExactSolution& sol, const Theorem2Params& params) {
    struct Region {
        std::string name;
        double x0, x1, y0, y1;
    };
    const std::vector<Region> regions = {
        {"one_sided_touch_x1_axis", 0.2, 0.8, 0.0, 0.5},
        {"straddle_x2_axis", -0.3, 0.3, 0.2, 0.8},
        {"graph_boundary_interior", 0.2, 0.7, 0.2, 0.7},
    };

    Theorem2Report rep;
    for (const Region& R : regions) {
        for (double q : params.q_values) {
            Theorem2Row row;
            row.region = R.name;
            row.q = q;
            for (int n : params.grid_ns) {
                const Grid2D g = Grid2D::square(1.0, n);
                ScalarField gn(g);
                for (int j = 0; j < g.ny; ++j)
                    for (int i = 0; i < g.nx; ++i)
                        gn.values[g.node_index(i, j)] =
                            sol.grad_norm(g.node_x(i), g.node_y(j));
                const VectorField gg = gradient(gn);
                std::vector<double> vals(static_cast<std::size_t>(g.n_cells()), 0.0);
                CellMask cm(static_cast<std::size_t>(g.n_cells()), 0);
                for (int cj = 0; cj < g.cells_y(); ++cj)
                    for (int ci = 0; ci < g.cells_x(); ++ci) {
                        const double x = g.cell_cx(ci), y = g.cell_cy(cj);
                        if (x < R.x0 || x > R.x1 || y < R.y0 || y > R.y1) continue;
                        const int c = g.cell_index(ci, cj);
                        cm[c] = 1;
                        vals[c] = std::pow(std::hypot(gg.fx[c], gg.fy[c]), q);
                    }
                row.values.push_back(integrate_cells(g, vals, &cm));
            }
            for (std::size_t k = 1; k < row.values.size(); ++k)
                row.ratios.push_back(row.values[k] / row.values[k - 1]);
            rep.rows.push_back(row);
        }
    }

    rep.one_sided_bounded = true;
    rep.straddle_blows_up = true;
    for (const auto& row : rep.rows) {
        if (row.q != 4.0) continue;
        if (row.region == "one_sided_touch_x1_axis") {
            for (double r : row.ratios) {
                rep.one_sided_max_ratio = std::max(rep.one_sided_max_ratio, r);
                if (r > 2.0) rep.one_sided_bounded = false;
            }
        } else if (row.region == "straddle_x2_axis") {
            rep.straddle_min_ratio = 1e300;
            for (double r : row.ratios) {
                rep.straddle_min_ratio = std::min(rep.straddle_min_ratio, r);
                if (r < 2.0) rep.straddle_blows_up = false;
            }
        }
    }
    return rep;
}

namespace {

/// Exact Aronsson pair on a Q1 grid: w = -log|grad u| (floored at the origin
/// node), F = -omega perp(grad u)/|grad u| at cells; origin cells masked out.
struct AronssonPair {
    ScalarField w;
    VectorField F;
    CellMask mask;  // active cells (origin neighborhood excluded)
};

AronssonPair aronsson_pair(const Grid2D& g) {
    const ExactSolution sol = aronsson_member();
    AronssonPair out;
    auto [w, valid] = sample_w(sol, g);
    out.w = std::move(w);
    out.F = VectorField(g);
    out.mask.assign(static_cast<std::size_t>(g.n_cells()), 0);
    for (int cj = 0; cj < g.cells_y(); ++cj)
        for (int ci = 0; ci < g.cells_x(); ++ci) {
            const double x = g.cell_cx(ci), y = g.cell_cy(cj);
            const int c = g.cell_index(ci, cj);
            if (std::abs(x) <= 1.5 * g.h && std::abs(y) <= 1.5 * g.h) continue;
            const Point gr = sol.grad(x, y);
            const double gn = std::hypot(gr.x, gr.y);
            const double om = (x * y) > 0 ? 1.0 : -1.0;
            out.F.fx[c] = -om * (-gr.y) / gn;
            out.F.fy[c] = -om * (gr.x) / gn;
            out.mask[c] = 1;
        }
    return out;
}

}  // namespace

AronssonReport run_aronsson_discrimination(const AronssonParams& params) {
    AronssonReport rep;
    rep.grid_ns = params.grid_ns;
    rep.full_square_fails = true;

    const std::vector<TestFunction> axis_tests = {
        {{0.5, 0.0}, 0.2}, {{0.0, 0.5}, 0.2}, {{-0.45, 0.0}, 0.15}, {{0.0, -0.45}, 0.15}};
    const std::vector<TestFunction> quad_tests = {
        {{0.5, 0.5}, 0.2}, {{-0.5, 0.5}, 0.2}, {{0.45, -0.5}, 0.18}, {{-0.5, -0.45}, 0.18}};

    for (int n : params.grid_ns) {
        const Grid2D g = Grid2D::square(1.0, n);
        AronssonPair pr = aronsson_pair(g);
        const VectorField gw = gradient(pr.w);
        std::vector<double> gn = cell_norms(gw);
        for (int c = 0; c < g.n_cells(); ++c)
            if (!pr.mask[c]) gn[c] = 0.0;
        const ScalarField s = cells_to_nodes(g, gn, &pr.mask);

        auto max_abs = [&](const std::vector<TestFunction>& tests) {
            const std::vector<double> r = weak_divergence_residual(pr.F, s, tests, &pr.mask);
            double m = 0.0;
            for (double v : r) m = std::max(m, std::abs(v));
            return m;
        };
        rep.axis_residual.push_back(max_abs(axis_tests));
        rep.quad_residual.push_back(max_abs(quad_tests));

        // full-square certificate with the axis tests in the suite
        std::vector<TestFunction> suite = make_test_suite(
            g, 20, params.seed, 0.12, 0.3,
            [&](double x, double y) { return 1.0 - std::max(std::abs(x), std::abs(y)); });
        suite.insert(suite.end(), axis_tests.begin(), axis_tests.end());
        ImcfCertificate cert = certify(pr.w, pr.F, suite, params.tol, &pr.mask);
        if (cert.pass) rep.full_square_fails = false;
        if (!cert.pass && rep.failing_tests.empty()) rep.failing_tests = cert.failure;
    }
    for (std::size_t k = 1; k < rep.axis_residual.size(); ++k) {
        rep.axis_ratio.push_back(rep.axis_residual[k] / rep.axis_residual[k - 1]);
        rep.quad_ratio.push_back(rep.quad_residual[k] / rep.quad_residual[k - 1]);
    }

    // each open quadrant separately, at the middle resolution
    rep.quadrants_pass = true;
    {
        const int n = params.grid_ns.size() > 1 ? params.grid_ns[1] : params.grid_ns[0];
        const Grid2D g = Grid2D::square(1.0, n);
        AronssonPair pr = aronsson_pair(g);
        const double m0 = 0.06;  // stay off the axes
        for (int qx = -1; qx <= 1; qx += 2) {
            for (int qy = -1; qy <= 1; qy += 2) {
                CellMask qmask(static_cast<std::size_t>(g.n_cells()), 0);
                for (int cj = 0; cj < g.cells_y(); ++cj)
                    for (int ci = 0; ci < g.cells_x(); ++ci) {
                        const double x = g.cell_cx(ci), y = g.cell_cy(cj);
                        if (qx * x > m0 && qy * y > m0)
                            qmask[g.cell_index(ci, cj)] = 1;
                    }
                std::vector<TestFunction> suite = make_test_suite(
                    g, 20, params.seed + 3, 0.08, 0.2, [&](double x, double y) {
                        return std::min(std::min(qx * x - m0, qy * y - m0),
                                        1.0 - std::max(std::abs(x), std::abs(y)));
                    });
                ImcfCertificate cert = certify(pr.w, pr.F, suite, params.tol, &qmask);
                rep.quadrants_pass = rep.quadrants_pass && cert.pass;
            }
        }
    }
    return rep;
}

}  // namespace imcflab
