#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "imcflab/grid.hpp"

namespace imcflab {

/// Validated exponent pair, p >= 2, 1/p + 1/p' = 1.
struct PExponent {
    double p = 2.0;
    double p_conj = 2.0;

    static PExponent of(double p);
};

enum class NodeState : std::uint8_t { Exterior = 0, Prescribed = 1, Unknown = 2 };

/// Dirichlet problem on a (possibly masked) region of the grid. Nodes are
/// exterior (unused), prescribed (carry boundary data), or unknown. A cell is
/// active iff none of its corners is exterior; every unknown node has all four
/// incident cells active.
struct DirichletProblem {
    Grid2D grid;
    std::vector<double> values;       // prescribed data (and initial guess), all nodes
    std::vector<NodeState> state;     // per node
    CellMask active;                  // per cell

    /// Full rectangle: outer boundary prescribed, all interior nodes unknown.
    static DirichletProblem rectangle(const Grid2D& g,
                                      const std::function<double(double, double)>& data);

    /// Masked domain: in_domain selects nodes inside the closed region;
    /// unknowns are in-domain nodes whose 8-neighborhood is in-domain (and not
    /// on the grid edge); the rest of the in-domain nodes are prescribed with
    /// `data` sampled at their positions.
    static DirichletProblem masked(const Grid2D& g,
                                   const std::function<bool(double, double)>& in_domain,
                                   const std::function<double(double, double)>& data);

    int n_unknowns() const;
    void validate() const;
};

struct SolveStage {
    double p = 2.0;
    double epsilon = 0.0;
    int iterations = 0;
    double energy = 0.0;
    double residual = 0.0;
    bool converged = false;
};

struct SolveParams {
    double epsilon = 1e-5;  // floor for the continuation schedule
    double tol = 1e-9;      // scale-normalized energy-gradient tolerance
    int max_iters = 50;     // per continuation stage
    std::vector<std::pair<double, double>> continuation;  // (p, epsilon) stages

    /// p in {2, 4, ..., p_max} with epsilon = max(eps_min, 10/p), then decade
    /// polish stages at p_max down to eps_min.
    static SolveParams default_for(double p_max, double eps_min = 1e-5);
};

struct SolveResult {
    ScalarField u;
    double energy = 0.0;    // (1/p int (|grad u|^2 + eps^2)^{p/2})^{1/p}
    double residual = 0.0;  // scale-normalized gradient norm at exit
    int iterations = 0;     // total Newton/Picard iterations
    bool converged = false;
    std::vector<SolveStage> stages;
    DirichletProblem problem;  // kept for the interior checks
};

/// (1/p int (|grad u|^2 + eps^2)^{p/2} dx)^{1/p}, accumulated in log space.
/// Throws on overflow (result exponent beyond +-700).
double energy(const ScalarField& u, const PExponent& p, double epsilon,
              const CellMask* mask = nullptr);

/// Damped Newton on the regularized p-Dirichlet energy with continuation in
/// (p, epsilon); Armijo backtracking; singular Newton systems fall back to one
/// damped Picard (lagged-weight) step. Non-convergence returns the best
/// iterate with converged = false.
SolveResult solve(const DirichletProblem& problem, const SolveParams& params);

/// Lemma-style interior gradient bound: lhs = max cell |grad u| at distance
/// > rho from the domain boundary, rhs = (C p^{5/2} / rho^3)^{1/p} * ||grad
/// u||_{L^p}. Caller asserts lhs <= rhs.
std::pair<double, double> interior_sup_gradient_check(const SolveResult& result, double rho,
                                                      const PExponent& p, double C = 100.0);

/// Min over active cells of the second gradient component.
double vertical_monotonicity_check(const SolveResult& result);

namespace detail {
/// Scale-normalized gradient data for one state; exposed for tests.
struct EnergyGradient {
    double phi = 0.0;             // raw objective (1/p) sum h^2 (g^2+eps^2)^{p/2}
    std::vector<double> grad;     // per node
    std::vector<double> scale;    // per node magnitude scale
    double residual = 0.0;        // max |grad|/scale over unknowns
};
EnergyGradient energy_gradient(const DirichletProblem& pr, const std::vector<double>& u,
                               double p, double eps);
}  // namespace detail

}  // namespace imcflab
