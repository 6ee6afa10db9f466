#include "imcflab/p_laplace.hpp"

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

/// (g2)^{e} via clamped exp(e*log g2); returns 0 for g2 == 0 (the p > 2 limit).
double pow_clamped(double g2, double e) {
    if (g2 <= 0.0) return 0.0;
    return std::exp(std::clamp(e * std::log(g2), -kLogClamp, kLogClamp));
}
}  // namespace

PExponent PExponent::of(double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("PExponent: p must be >= 2");
    PExponent e;
    e.p = p;
    e.p_conj = p / (p - 1.0);
    if (std::abs(1.0 / e.p + 1.0 / e.p_conj - 1.0) > 1e-12)
        throw std::invalid_argument("PExponent: conjugate identity violated");
    return e;
}

DirichletProblem DirichletProblem::rectangle(
    const Grid2D& g, const std::function<double(double, double)>& data) {
    return masked(
        g, [](double, double) { return true; }, data);
}

DirichletProblem DirichletProblem::masked(
    const Grid2D& g, const std::function<bool(double, double)>& in_domain,
    const std::function<double(double, double)>& data) {
    DirichletProblem pr;
    pr.grid = g;
    pr.values.assign(static_cast<std::size_t>(g.n_nodes()), 0.0);
    pr.state.assign(static_cast<std::size_t>(g.n_nodes()), NodeState::Exterior);
    std::vector<std::uint8_t> in(static_cast<std::size_t>(g.n_nodes()), 0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            in[g.node_index(i, j)] = in_domain(g.node_x(i), g.node_y(j)) ? 1 : 0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const int k = g.node_index(i, j);
            if (!in[k]) continue;
            bool interior = i > 0 && j > 0 && i < g.nx - 1 && j < g.ny - 1;
            if (interior) {
                for (int dj = -1; dj <= 1 && interior; ++dj)
                    for (int di = -1; di <= 1; ++di)
                        if (!in[g.node_index(i + di, j + dj)]) {
                            interior = false;
                            break;
                        }
            }
            pr.state[k] = interior ? NodeState::Unknown : NodeState::Prescribed;
            pr.values[k] = data(g.node_x(i), g.node_y(j));
        }
    }
    pr.active.assign(static_cast<std::size_t>(g.n_cells()), 0);
    for (int j = 0; j < g.cells_y(); ++j)
        for (int i = 0; i < g.cells_x(); ++i) {
            const bool a = in[g.node_index(i, j)] && in[g.node_index(i + 1, j)] &&
                           in[g.node_index(i, j + 1)] && in[g.node_index(i + 1, j + 1)];
            pr.active[g.cell_index(i, j)] = a ? 1 : 0;
        }
    pr.validate();
    return pr;
}

int DirichletProblem::n_unknowns() const {
    int n = 0;
    for (NodeState s : state) n += (s == NodeState::Unknown);
    return n;
}

void DirichletProblem::validate() const {
    if (static_cast<int>(values.size()) != grid.n_nodes() ||
        static_cast<int>(state.size()) != grid.n_nodes() ||
        static_cast<int>(active.size()) != grid.n_cells())
        throw std::invalid_argument("DirichletProblem: inconsistent sizes");
    for (std::size_t k = 0; k < values.size(); ++k)
        if (state[k] != NodeState::Exterior && !std::isfinite(values[k]))
            throw std::invalid_argument("DirichletProblem: non-finite boundary value at node " +
                                        std::to_string(k));
    if (n_unknowns() == 0) throw std::invalid_argument("DirichletProblem: no unknowns");
}

SolveParams SolveParams::default_for(double p_max, double eps_min) {
    SolveParams sp;
    sp.epsilon = eps_min;
    for (double p : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0}) {
        if (p > p_max) break;
        sp.continuation.emplace_back(p, std::max(eps_min, 10.0 / p));
    }
    if (sp.continuation.empty() || sp.continuation.back().first != p_max)
        sp.continuation.emplace_back(p_max, std::max(eps_min, 10.0 / p_max));
    double e = sp.continuation.back().second;
    while (e > eps_min * 1.0001) {
        e = std::max(eps_min, e / 10.0);
        sp.continuation.emplace_back(p_max, e);
    }
    return sp;
}

double energy(const ScalarField& u, const PExponent& p, double epsilon, const CellMask* mask) {
    const VectorField g = gradient(u);
    for (std::size_t k = 0; k < g.fx.size(); ++k)
        if (!std::isfinite(g.fx[k] * g.fx[k] + g.fy[k] * g.fy[k]))
            throw std::overflow_error("energy: gradient magnitude overflow");
    const double e2 = epsilon * epsilon;
    // log-sum-exp over terms (p/2) log(g^2 + eps^2) + 2 log h
    double m = -std::numeric_limits<double>::infinity();
    std::vector<double> ex;
    ex.reserve(g.fx.size());
    const double logh2 = 2.0 * std::log(u.grid.h);
    for (std::size_t k = 0; k < g.fx.size(); ++k) {
        if (mask && !(*mask)[k]) continue;
        const double g2 = g.fx[k] * g.fx[k] + g.fy[k] * g.fy[k] + e2;
        if (g2 <= 0.0) continue;
        const double t = 0.5 * p.p * std::log(g2) + logh2;
        ex.push_back(t);
        m = std::max(m, t);
    }
    if (ex.empty() || !std::isfinite(m)) return 0.0;
    std::vector<double> terms;
    terms.reserve(ex.size());
    for (double t : ex) terms.push_back(std::exp(t - m));
    const double lse = m + std::log(kernels::det_sum(terms));
    const double log_e = (lse - std::log(p.p)) / p.p;
    if (log_e > kLogClamp) throw std::overflow_error("energy: overflow");
    return std::exp(log_e);
}

namespace detail {

EnergyGradient energy_gradient(const DirichletProblem& pr, const std::vector<double>& u,
                               double p, double eps) {
    const Grid2D& g = pr.grid;
    const int nc = g.n_cells();
    std::vector<double> gx(nc), gy(nc);
    if (kernels::parallel_enabled())
        kernels::parallel::cell_gradient(g.nx, g.ny, g.h, u.data(), gx.data(), gy.data());
    else
        kernels::serial::cell_gradient(g.nx, g.ny, g.h, u.data(), gx.data(), gy.data());

    const double e2 = eps * eps;
    std::vector<double> wgx(nc, 0.0), wgy(nc, 0.0), wab(nc, 0.0), phi_terms;
    phi_terms.assign(nc, 0.0);
    const double h2 = g.h * g.h;
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
    for (int c = 0; c < nc; ++c) {
        if (!pr.active[c]) continue;
        const double g2 = gx[c] * gx[c] + gy[c] * gy[c] + e2;
        const double W = pow_clamped(g2, 0.5 * p - 1.0);
        wgx[c] = W * gx[c];
        wgy[c] = W * gy[c];
        wab[c] = W * std::sqrt(g2);
        phi_terms[c] = h2 / p * pow_clamped(g2, 0.5 * p);
    }
    EnergyGradient out;
    out.phi = kernels::det_sum(phi_terms);
    out.grad.assign(static_cast<std::size_t>(g.n_nodes()), 0.0);
    out.scale.assign(static_cast<std::size_t>(g.n_nodes()), 0.0);
    if (kernels::parallel_enabled()) {
        kernels::parallel::node_gather(g.nx, g.ny, g.h, wgx.data(), wgy.data(),
                                       out.grad.data());
    } else {
        kernels::serial::node_gather(g.nx, g.ny, g.h, wgx.data(), wgy.data(), out.grad.data());
    }
    // magnitude scale: same gather with absolute weights
    {
        std::vector<double> zero(nc, 0.0);
        // |contribution| per corner is (h/2)(|wgx| + |wgy|) <= h * wab; gather wab
        const int cw = g.cells_x(), ch = g.cells_y();
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                double acc = 0.0;
                for (int dj = -1; dj <= 0; ++dj)
                    for (int di = -1; di <= 0; ++di) {
                        const int ci = i + di, cj = j + dj;
                        if (ci < 0 || cj < 0 || ci >= cw || cj >= ch) continue;
                        acc += wab[cj * cw + ci];
                    }
                out.scale[g.node_index(i, j)] = g.h * acc;
            }
        }
    }
    double res = 0.0;
    for (std::size_t k = 0; k < out.grad.size(); ++k) {
        if (pr.state[k] != NodeState::Unknown) continue;
        res = std::max(res, std::abs(out.grad[k]) / (1e-300 + out.scale[k]));
    }
    out.residual = res;
    return out;
}

}  // namespace detail

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

/// Reduced Newton (or Picard when picard=true) matrix over unknowns.
SpMat assemble_hessian(const DirichletProblem& pr, const std::vector<double>& u, double p,
                       double eps, const std::vector<int>& red, int nred, bool picard) {
    const Grid2D& g = pr.grid;
    const int cw = g.cells_x();
    const int nc = g.n_cells();
    std::vector<double> gx(nc), gy(nc);
    kernels::serial::cell_gradient(g.nx, g.ny, g.h, u.data(), gx.data(), gy.data());
    const double e2 = eps * eps;
    const double inv2h = 1.0 / (2.0 * g.h);
    const double bx[4] = {-inv2h, inv2h, -inv2h, inv2h};
    const double by[4] = {-inv2h, -inv2h, inv2h, inv2h};
    std::vector<Trip> trips;
    trips.reserve(static_cast<std::size_t>(nc) * 16);
    const double h2 = g.h * g.h;
    for (int cj = 0; cj < g.cells_y(); ++cj) {
        for (int ci = 0; ci < cw; ++ci) {
            const int c = cj * cw + ci;
            if (!pr.active[c]) continue;
            const double g2 = gx[c] * gx[c] + gy[c] * gy[c] + e2;
            double W = pow_clamped(g2, 0.5 * p - 1.0);
            double W2 = picard ? 0.0 : (p - 2.0) * pow_clamped(g2, 0.5 * p - 2.0);
            if (W <= 0.0 && W2 <= 0.0) W = 1e-300;  // degenerate cell floor
            const int nodes[4] = {g.node_index(ci, cj), g.node_index(ci + 1, cj),
                                  g.node_index(ci, cj + 1), g.node_index(ci + 1, cj + 1)};
            for (int a = 0; a < 4; ++a) {
                const int ra = red[nodes[a]];
                if (ra < 0) continue;
                const double da = bx[a] * gx[c] + by[a] * gy[c];
                for (int b = 0; b < 4; ++b) {
                    const int rb = red[nodes[b]];
                    if (rb < 0) continue;
                    const double db = bx[b] * gx[c] + by[b] * gy[c];
                    const double v =
                        h2 * (W * (bx[a] * bx[b] + by[a] * by[b]) + W2 * da * db);
                    trips.emplace_back(ra, rb, v);
                }
            }
        }
    }
    SpMat H(nred, nred);
    H.setFromTriplets(trips.begin(), trips.end());
    return H;
}

}  // namespace

SolveResult solve(const DirichletProblem& problem, const SolveParams& params) {
    problem.validate();
    if (params.tol <= 0.0 || params.max_iters < 1 || params.epsilon < 0.0)
        throw std::invalid_argument("SolveParams: invalid tol/max_iters/epsilon");
    if (params.continuation.empty())
        throw std::invalid_argument("SolveParams: empty continuation");
    for (std::size_t s = 1; s < params.continuation.size(); ++s) {
        if (params.continuation[s].first < params.continuation[s - 1].first ||
            params.continuation[s].second > params.continuation[s - 1].second + 1e-15)
            throw std::invalid_argument(
                "SolveParams: continuation must have nondecreasing p, nonincreasing epsilon");
    }

    const Grid2D& g = problem.grid;
    std::vector<int> red(static_cast<std::size_t>(g.n_nodes()), -1);
    std::vector<int> unknowns;
    for (int k = 0; k < g.n_nodes(); ++k)
        if (problem.state[k] == NodeState::Unknown) {
            red[k] = static_cast<int>(unknowns.size());
            unknowns.push_back(k);
        }
    const int nred = static_cast<int>(unknowns.size());

    std::vector<double> u = problem.values;
    SolveResult out;
    out.problem = problem;
    int total_iters = 0;
    bool all_converged = true;

    for (const auto& [p, eps] : params.continuation) {
        SolveStage stage;
        stage.p = p;
        stage.epsilon = eps;
        bool converged = false;
        detail::EnergyGradient eg = detail::energy_gradient(problem, u, p, eps);
        for (int it = 0; it < params.max_iters; ++it) {
            if (eg.residual <= params.tol) {
                converged = true;
                break;
            }
            Eigen::VectorXd rhs(nred);
            for (int k = 0; k < nred; ++k) rhs[k] = -eg.grad[unknowns[k]];

            Eigen::VectorXd d;
            bool have_dir = false;
            {
                SpMat H = assemble_hessian(problem, u, p, eps, red, nred, /*picard=*/false);
                Eigen::SimplicialLDLT<SpMat> ldlt(H);
                if (ldlt.info() == Eigen::Success) {
                    d = ldlt.solve(rhs);
                    have_dir = d.allFinite();
                }
            }
            if (!have_dir) {
                // Picard fallback: lagged-weight linearization
                SpMat H = assemble_hessian(problem, u, p, eps, red, nred, /*picard=*/true);
                Eigen::SimplicialLDLT<SpMat> ldlt(H);
                if (ldlt.info() != Eigen::Success) break;
                d = ldlt.solve(rhs);
                if (!d.allFinite()) break;
            }

            // Armijo backtracking on the raw objective, with an ulp-level
            // noise floor so Newton can polish once energy differences fall
            // below the resolution of phi
            double gTd = 0.0;
            for (int k = 0; k < nred; ++k) gTd += eg.grad[unknowns[k]] * d[k];
            const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(eg.phi);
            double t = 1.0;
            bool accepted = false;
            std::vector<double> u2 = u;
            for (int ls = 0; ls < 60; ++ls) {
                for (int k = 0; k < nred; ++k) u2[unknowns[k]] = u[unknowns[k]] + t * d[k];
                detail::EnergyGradient eg2 = detail::energy_gradient(problem, u2, p, eps);
                if (std::isfinite(eg2.phi) && eg2.phi <= eg.phi + 1e-4 * t * gTd + noise) {
                    u.swap(u2);
                    eg = std::move(eg2);
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            ++total_iters;
            ++stage.iterations;
            if (!accepted) {
                // stagnation at machine precision: converged only if the
                // tolerance was actually met (the invariant on SolveResult)
                converged = eg.residual <= params.tol;
                break;
            }
        }
        if (!converged && eg.residual <= params.tol) converged = true;
        stage.residual = eg.residual;
        stage.converged = converged;
        {
            ScalarField uf;
            uf.grid = g;
            uf.values = u;
            // stage energy over active cells only
            stage.energy = energy(uf, PExponent::of(p), eps, &problem.active);
        }
        out.stages.push_back(stage);
        all_converged = all_converged && converged;
    }

    out.u.grid = g;
    out.u.values = std::move(u);
    out.energy = out.stages.back().energy;
    out.residual = out.stages.back().residual;
    out.iterations = total_iters;
    out.converged = all_converged;
    return out;
}

std::pair<double, double> interior_sup_gradient_check(const SolveResult& result, double rho,
                                                      const PExponent& p, double C) {
    const Grid2D& g = result.u.grid;
    const DirichletProblem& pr = result.problem;
    const VectorField gr = gradient(result.u);

    // distance from each cell center to the nearest non-unknown node
    double lhs = -1.0;
    const int reach = static_cast<int>(std::ceil(rho / g.h)) + 1;
    for (int cj = 0; cj < g.cells_y(); ++cj) {
        for (int ci = 0; ci < g.cells_x(); ++ci) {
            const int c = g.cell_index(ci, cj);
            if (!pr.active[c]) continue;
            const double cx = g.cell_cx(ci), cy = g.cell_cy(cj);
            double dmin = std::numeric_limits<double>::infinity();
            for (int j = std::max(0, cj - reach); j <= std::min(g.ny - 1, cj + 1 + reach); ++j)
                for (int i = std::max(0, ci - reach); i <= std::min(g.nx - 1, ci + 1 + reach);
                     ++i) {
                    if (pr.state[g.node_index(i, j)] == NodeState::Unknown) continue;
                    const double dx = g.node_x(i) - cx, dy = g.node_y(j) - cy;
                    dmin = std::min(dmin, std::hypot(dx, dy));
                }
            if (dmin > rho) lhs = std::max(lhs, std::hypot(gr.fx[c], gr.fy[c]));
        }
    }
    if (lhs < 0.0)
        throw std::invalid_argument("interior_sup_gradient_check: rho leaves no interior cells");

    // ||grad u||_{L^p} over the domain, in log space
    std::vector<double> lt;
    double m = -std::numeric_limits<double>::infinity();
    const double logh2 = 2.0 * std::log(g.h);
    for (int c = 0; c < g.n_cells(); ++c) {
        if (!pr.active[c]) continue;
        const double gn = std::hypot(gr.fx[c], gr.fy[c]);
        if (gn <= 0.0) continue;
        const double t = p.p * std::log(gn) + logh2;
        lt.push_back(t);
        m = std::max(m, t);
    }
    double lp_norm = 0.0;
    if (!lt.empty() && std::isfinite(m)) {
        std::vector<double> terms;
        terms.reserve(lt.size());
        for (double t : lt) terms.push_back(std::exp(t - m));
        lp_norm = std::exp((m + std::log(kernels::det_sum(terms))) / p.p);
    }
    // n = 3 (slab extension): prefactor (C p^{5/2} / rho^3)^{1/p}
    const double rhs =
        std::exp((std::log(C) + 2.5 * std::log(p.p) - 3.0 * std::log(rho)) / p.p) * lp_norm;
    return {lhs, rhs};
}

double vertical_monotonicity_check(const SolveResult& result) {
    const VectorField gr = gradient(result.u);
    double mn = std::numeric_limits<double>::infinity();
    for (int c = 0; c < result.u.grid.n_cells(); ++c) {
        if (!result.problem.active[c]) continue;
        mn = std::min(mn, gr.fy[c]);
    }
    return mn;
}

}  // namespace imcflab
