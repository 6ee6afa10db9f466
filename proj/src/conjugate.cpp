#include "imcflab/conjugate.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "imcflab/kernels.hpp"

namespace imcflab {

namespace {
constexpr double kLogClamp = 700.0;
constexpr double kHourglass = 1.0;  // stabilization weight for the LS normal equations

double exp_clamped(double x) { return std::exp(std::clamp(x, -kLogClamp, kLogClamp)); }
}  // namespace

ConjugatePair conjugate(const ScalarField& u, const PExponent& p, double gamma, Point anchor,
                        const CellMask* active_in) {
    u.validate("conjugate: u");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("conjugate: gamma must be in (0, 1)");
    const Grid2D& g = u.grid;
    CellMask active = active_in ? *active_in : CellMask(g.n_cells(), 1);
    if (static_cast<int>(active.size()) != g.n_cells())
        throw std::invalid_argument("conjugate: bad active mask");

    const VectorField gr = gradient(u);
    const int nc = g.n_cells();
    const double s = p.p - 1.0;

    // Scaled target: G = -gn^{p-2} perp(grad u) = gn^{p-1} * Gt with
    //   Gt = -perp(grad u)/gn  (unit vector), and cell scale exponent
    //   a_c = (p-1) log gn_c  (so G = e^{a_c} Gt).
    std::vector<double> gtx(nc, 0.0), gty(nc, 0.0), ac(nc, 0.0);
    for (int c = 0; c < nc; ++c) {
        if (!active[c]) continue;
        const double gn = std::hypot(gr.fx[c], gr.fy[c]);
        if (!(gn > 1e-14))
            throw std::invalid_argument(
                "conjugate: vanishing gradient on active cell " + std::to_string(c) +
                " (target field undefined)");
        gtx[c] = gr.fy[c] / gn;   // -perp components: perp = (-fy, fx)
        gty[c] = -gr.fx[c] / gn;
        ac[c] = s * std::log(gn);
    }

    // Node scale exponents: mean of adjacent active-cell exponents.
    std::vector<double> an(static_cast<std::size_t>(g.n_nodes()), 0.0);
    NodeMask defined(static_cast<std::size_t>(g.n_nodes()), 0);
    const int cw = g.cells_x(), ch = g.cells_y();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double acc = 0.0;
            int cnt = 0;
            for (int dj = -1; dj <= 0; ++dj)
                for (int di = -1; di <= 0; ++di) {
                    const int ci = i + di, cj = j + dj;
                    if (ci < 0 || cj < 0 || ci >= cw || cj >= ch) continue;
                    const int c = cj * cw + ci;
                    if (!active[c]) continue;
                    acc += ac[c];
                    ++cnt;
                }
            if (cnt) {
                an[g.node_index(i, j)] = acc / cnt;
                defined[g.node_index(i, j)] = 1;
            }
        }
    }

    // Relative weak-curl residual of the target (refuses non-p-harmonic input).
    // curl_k = sum_c h^2 G_c . perp(grad phi_k); computed in the scaled basis.
    double curl_worst = 0.0;
    {
        const double inv2h = 1.0 / (2.0 * g.h);
        const double bx[4] = {-inv2h, inv2h, -inv2h, inv2h};
        const double by[4] = {-inv2h, -inv2h, inv2h, inv2h};
        double worst = 0.0;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const int k = g.node_index(i, j);
                if (!defined[k]) continue;
                // only interior-of-mask nodes: all 4 incident cells active
                bool full = i > 0 && j > 0 && i < g.nx - 1 && j < g.ny - 1;
                if (full)
                    for (int dj = -1; dj <= 0 && full; ++dj)
                        for (int di = -1; di <= 0; ++di)
                            if (!active[(j + dj) * cw + (i + di)]) {
                                full = false;
                                break;
                            }
                if (!full) continue;
                double curl = 0.0, mag = 0.0;
                const int cells[4] = {(j - 1) * cw + (i - 1), (j - 1) * cw + i,
                                      j * cw + (i - 1), j * cw + i};
                const int corner[4] = {3, 2, 1, 0};  // node's corner role in each cell
                for (int q = 0; q < 4; ++q) {
                    const int c = cells[q];
                    const double sc = exp_clamped(ac[c] - an[k]);
                    // perp(grad phi) = (-by, bx)
                    const double px = -by[corner[q]], py = bx[corner[q]];
                    curl += sc * (gtx[c] * px + gty[c] * py);
                    mag += sc * std::hypot(gtx[c], gty[c]) * std::hypot(px, py);
                }
                if (mag > 0.0) worst = std::max(worst, std::abs(curl) / mag);
            }
        }
        if (worst > 1e-6)
            throw std::invalid_argument(
                "conjugate: discrete curl residual " + std::to_string(worst) +
                " exceeds 1e-6 of the target magnitude; input is not p-harmonic enough");
        curl_worst = worst;
    }

    // Least-squares potential in the scaled basis: v = e^{-? } ... substitute
    // v_node = exp(an_node) * z_node and minimize
    //   sum_c h^2 e^{-2 a_c} |B (e^{an} z) - e^{a_c} Gt|^2 + hourglass term,
    // i.e. rows scaled to O(1): B-tilde entries e^{an_node - a_c} B.
    using SpMat = Eigen::SparseMatrix<double>;
    using Trip = Eigen::Triplet<double>;
    std::vector<int> red(static_cast<std::size_t>(g.n_nodes()), -1);
    std::vector<int> nds;
    for (int k = 0; k < g.n_nodes(); ++k)
        if (defined[k]) {
            red[k] = static_cast<int>(nds.size());
            nds.push_back(k);
        }
    const int nred = static_cast<int>(nds.size());

    const double inv2h = 1.0 / (2.0 * g.h);
    const double bx[4] = {-inv2h, inv2h, -inv2h, inv2h};
    const double by[4] = {-inv2h, -inv2h, inv2h, inv2h};
    const double hg[4] = {inv2h, -inv2h, -inv2h, inv2h};  // hourglass mode
    std::vector<Trip> trips;
    trips.reserve(static_cast<std::size_t>(nc) * 16);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nred);
    const double h2 = g.h * g.h;
    for (int cj = 0; cj < ch; ++cj) {
        for (int ci = 0; ci < cw; ++ci) {
            const int c = cj * cw + ci;
            if (!active[c]) continue;
            const int nodes[4] = {g.node_index(ci, cj), g.node_index(ci + 1, cj),
                                  g.node_index(ci, cj + 1), g.node_index(ci + 1, cj + 1)};
            double scl[4];
            for (int a = 0; a < 4; ++a) scl[a] = exp_clamped(an[nodes[a]] - ac[c]);
            for (int a = 0; a < 4; ++a) {
                const int ra = red[nodes[a]];
                rhs[ra] += h2 * scl[a] * (bx[a] * gtx[c] + by[a] * gty[c]);
                for (int b = 0; b < 4; ++b) {
                    const int rb = red[nodes[b]];
                    const double v = h2 * scl[a] * scl[b] *
                                     (bx[a] * bx[b] + by[a] * by[b] +
                                      kHourglass * hg[a] * hg[b]);
                    trips.emplace_back(ra, rb, v);
                }
            }
        }
    }

    // Anchor: snap to the nearest defined node; pin its z to 1 (gauge), shift later.
    int ai = static_cast<int>(std::llround((anchor.x - g.x0) / g.h));
    int aj = static_cast<int>(std::llround((anchor.y - g.y0) / g.h));
    ai = std::clamp(ai, 0, g.nx - 1);
    aj = std::clamp(aj, 0, g.ny - 1);
    if (!defined[g.node_index(ai, aj)])
        throw std::invalid_argument("conjugate: anchor node is outside the active region");
    const int pin = red[g.node_index(ai, aj)];

    // Impose z[pin] = 1 by row/col replacement.
    SpMat A(nred, nred);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd apin = A.col(pin);
    for (int k = 0; k < nred; ++k) rhs[k] -= apin[k] * 1.0;
    std::vector<Trip> trips2;
    trips2.reserve(trips.size());
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) {
            if (it.row() == pin || it.col() == pin) continue;
            trips2.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                it.value());
        }
    trips2.emplace_back(pin, pin, 1.0);
    rhs[pin] = 1.0;
    SpMat A2(nred, nred);
    A2.setFromTriplets(trips2.begin(), trips2.end());
    Eigen::SimplicialLDLT<SpMat> ldlt(A2);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("conjugate: potential solve failed to factorize");
    Eigen::VectorXd z = ldlt.solve(rhs);
    if (!z.allFinite()) throw std::runtime_error("conjugate: potential solve returned non-finite");

    // v_unshifted(node) = exp(an) * z; normalization shift c = gamma^{p-1} - v(anchor).
    // log gamma^{p-1} = s log gamma. v(anchor) = exp(an_a) * 1.
    const double an_a = an[g.node_index(ai, aj)];
    // c as sign/log pair: c = exp(s log gamma) - exp(an_a)
    const double lg = s * std::log(gamma);
    double c_sign;
    double c_log;
    {
        const double m = std::max(lg, an_a);
        const double d = std::exp(lg - m) - std::exp(an_a - m);
        if (d == 0.0) {
            c_sign = 0.0;
            c_log = -std::numeric_limits<double>::infinity();
        } else {
            c_sign = d > 0 ? 1.0 : -1.0;
            c_log = m + std::log(std::abs(d));
        }
    }

    ConjugatePair pair;
    pair.u = u;
    pair.p = p;
    pair.gamma = gamma;
    pair.anchor = {g.node_x(ai), g.node_y(aj)};
    pair.active = std::move(active);
    pair.v = ScalarField(g, 0.0);
    pair.log_v = ScalarField(g, 0.0);
    pair.v_defined = defined;
    pair.v_positive.assign(static_cast<std::size_t>(g.n_nodes()), 0);
    pair.curl_residual = curl_worst;

    for (int k = 0; k < g.n_nodes(); ++k) {
        if (!defined[k]) continue;
        const double zk = z[red[k]];
        // v = exp(an) * z + c, evaluated stably: log v = an + log(z + c*exp(-an))
        double inner = zk;
        if (c_sign != 0.0) inner += c_sign * exp_clamped(c_log - an[k]);
        if (inner > 0.0) {
            const double lv = an[k] + std::log(inner);
            pair.log_v.values[k] = lv;
            pair.v.values[k] = exp_clamped(lv);
            pair.v_positive[k] = 1;
        } else if (inner < 0.0) {
            pair.v.values[k] = -exp_clamped(an[k] + std::log(-inner));
        }  // inner == 0: v = 0, not positive
    }
    return pair;
}

TransformedField log_transform(const ConjugatePair& pair, const NodeMask* region) {
    const Grid2D& g = pair.u.grid;
    const double p = pair.p.p;
    const double s = p - 1.0;

    NodeMask want = region ? *region : pair.v_defined;
    if (static_cast<int>(want.size()) != g.n_nodes())
        throw std::invalid_argument("log_transform: bad region mask");

    // v must be positive on the requested region; report offenders, never clamp.
    std::string offenders;
    int bad = 0;
    for (int j = 0; j < g.ny && bad < 8; ++j)
        for (int i = 0; i < g.nx && bad < 8; ++i) {
            const int k = g.node_index(i, j);
            if (!want[k] || !pair.v_defined[k]) continue;
            if (!pair.v_positive[k]) {
                offenders += " (" + std::to_string(i) + "," + std::to_string(j) + ")";
                ++bad;
            }
        }
    if (bad)
        throw std::invalid_argument("log_transform: v <= 0 at nodes" + offenders +
                                    (bad >= 8 ? " ..." : ""));

    TransformedField t;
    t.p = pair.p;
    t.w = ScalarField(g, 0.0);
    t.w_valid.assign(static_cast<std::size_t>(g.n_nodes()), 0);
    for (int k = 0; k < g.n_nodes(); ++k) {
        if (!pair.v_defined[k] || !pair.v_positive[k]) continue;
        t.w.values[k] = pair.log_v.values[k] / (1.0 - p);
        t.w_valid[k] = 1;
    }

    // F = (p-1)^{-1/(p-1)} e^w perp(grad u), with e^w = v^{1/(1-p)} from the
    // cell-averaged v in log space.
    const VectorField gp = perp(gradient(pair.u));
    t.F = VectorField(g, 0.0, 0.0);
    t.f_valid.assign(static_cast<std::size_t>(g.n_cells()), 0);
    const int cw = g.cells_x();
    const double lpm1 = std::log(s);
    for (int cj = 0; cj < g.cells_y(); ++cj) {
        for (int ci = 0; ci < cw; ++ci) {
            const int c = cj * cw + ci;
            if (!pair.active[c]) continue;
            const int n00 = g.node_index(ci, cj), n10 = g.node_index(ci + 1, cj);
            const int n01 = g.node_index(ci, cj + 1), n11 = g.node_index(ci + 1, cj + 1);
            if (!(pair.v_positive[n00] && pair.v_positive[n10] && pair.v_positive[n01] &&
                  pair.v_positive[n11]))
                continue;
            // log of the cell-averaged v via log-sum-exp of the four corners
            const double l00 = pair.log_v.values[n00], l10 = pair.log_v.values[n10];
            const double l01 = pair.log_v.values[n01], l11 = pair.log_v.values[n11];
            const double m = std::max(std::max(l00, l10), std::max(l01, l11));
            const double sum = std::exp(l00 - m) + std::exp(l10 - m) + std::exp(l01 - m) +
                               std::exp(l11 - m);
            const double log_vc = m + std::log(0.25 * sum);
            const double ew = exp_clamped(log_vc / (1.0 - p));
            const double f = exp_clamped(-lpm1 / s) * ew;
            t.F.fx[c] = f * gp.fx[c];
            t.F.fy[c] = f * gp.fy[c];
            t.f_valid[c] = 1;
        }
    }
    return t;
}

std::vector<double> pprime_equation_residual(const TransformedField& t,
                                             const std::vector<TestFunction>& tests) {
    const Grid2D& g = t.w.grid;
    const double pc = t.p.p_conj;
    const VectorField gw = gradient(t.w);
    const int nc = g.n_cells();
    std::vector<double> flux_x(nc, 0.0), flux_y(nc, 0.0), src(nc, 0.0);
    for (int c = 0; c < nc; ++c) {
        if (!t.f_valid[c]) continue;
        const double gn = std::hypot(gw.fx[c], gw.fy[c]);
        if (gn <= 0.0) continue;  // integrand's limit at grad w = 0
        const double wgt = std::pow(gn, pc - 2.0);
        flux_x[c] = wgt * gw.fx[c];
        flux_y[c] = wgt * gw.fy[c];
        src[c] = std::pow(gn, pc);
    }
    for (std::size_t k = 0; k < tests.size(); ++k)
        if (!tests[k].supported_inside(g))
            throw std::invalid_argument("pprime_equation_residual: test " + std::to_string(k) +
                                        " support exits the grid interior");
    std::vector<double> out(tests.size(), 0.0);
    const double h2 = g.h * g.h;
    for (std::size_t k = 0; k < tests.size(); ++k) {
        std::vector<double> terms;
        terms.reserve(static_cast<std::size_t>(nc));
        for (int cj = 0; cj < g.cells_y(); ++cj)
            for (int ci = 0; ci < g.cells_x(); ++ci) {
                const int c = g.cell_index(ci, cj);
                if (!t.f_valid[c]) continue;
                const double cx = g.cell_cx(ci), cy = g.cell_cy(cj);
                const Point ge = tests[k].gradient(cx, cy);
                const double ev = tests[k].value(cx, cy);
                if (ge.x == 0.0 && ge.y == 0.0 && ev == 0.0) continue;
                terms.push_back(h2 * (flux_x[c] * ge.x + flux_y[c] * ge.y + ev * src[c]));
            }
        out[k] = kernels::serial::det_sum(terms);
    }
    return out;
}

}  // namespace imcflab
