#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imcflab/conjugate.hpp"
#include "imcflab/corpus.hpp"
#include "imcflab/imcf_verify.hpp"
#include "imcflab/p_laplace.hpp"

namespace imcflab {

/// One-sided allowance for w_p <= w_ref + slack at finite p (Laplace-method
/// rate, constant calibrated on the linear member).
inline double prop1_slack(double p) { return (1.0 + std::log(p - 1.0)) / (p - 1.0); }

struct SweepRecord {
    double p = 0.0;
    double epsilon = 0.0;
    int iterations = 0;
    bool converged = false;
    double energy = 0.0;
    double sup_grad_interior = 0.0;   // lhs of the interior bound
    double sup_grad_bound = 0.0;      // rhs of the interior bound
    double min_vertical = 0.0;        // min d2 u over active cells
    double l1_distance = 0.0;         // pipeline metric vs the reference
    double one_sided_min = 0.0;       // min (w_ref - w_p) over the report region
    double sup_w_error = 0.0;         // sup |w_p - w_ref| over the report region
    double sup_u_error = 0.0;         // sup |u_p - u_ref| over unknowns
};

struct SweepReport {
    std::string member;
    std::string geometry;  // "slab" or "sector"
    int n = 0;
    double gamma = 0.5;
    std::vector<SweepRecord> records;
    double l1_slope = 0.0;                       // fitted log-log slope of l1 vs p
    std::vector<double> consecutive_l1;          // gauge-modded consecutive distances
    bool l1_decreasing = false;
    bool consecutive_decreasing = false;
    bool one_sided_ok = false;                   // only asserted on slab geometry
    bool all_converged = false;
};

struct Prop1Params {
    int n = 65;
    std::vector<double> p_values{2, 4, 8, 16};
    double delta = 0.05;
    double sigma = 0.5;
    double gamma = 0.5;
    double eps_min = 1e-5;
    std::uint64_t seed = 1;
    VerifyTolerances tol;
};

struct Prop1Outcome {
    SweepReport sweep;
    ImcfCertificate limit_certificate;     // exact-limit pair (gated)
    ImcfCertificate finite_p_certificate;  // largest-p pair (reported)
    ScalarField v_last;                    // conjugate at the largest p
    ScalarField w_last;
    VectorField F_last;
    bool pass = false;
    std::string detail;
};

/// The full pipeline for one corpus member: solve / conjugate / transform per
/// p, metrics against the exact reference, certificate of the limit pair.
/// linear, aronsson43 -> Q1 slab problems; angle -> the annular sector (the
/// convergence-rate geometry) unless `force_rescaled`.
Prop1Outcome run_prop1(const ExactSolution& sol, const Prop1Params& params,
                       bool force_rescaled = false);

struct Lemma42Row {
    double p = 0.0;
    double upper_quantity = 0.0;  // (inf_y - sup_x)_+^{1/(p-1)}
    double lower_quantity = 0.0;  // (sup_y - inf_x)^{1/(p-1)}
    double sup_bound = 0.0;       // sup |grad u_inf| along the curve
    double mean_bound = 0.0;      // mean (lambda')^perp . grad u_inf
};

struct Lemma42Params {
    int n = 129;
    std::vector<double> p_values{8, 16, 32, 64};
    double rho = 0.1;
    double slack = 5e-2;
    double gamma = 0.5;
    double eps_min = 1e-5;
};

struct Lemma42Report {
    std::vector<Lemma42Row> rows;
    bool upper_ok = false;  // upper_quantity <= sup_bound + slack at p_max
    bool lower_ok = false;  // lower_quantity >= mean_bound - slack at p_max
};

/// Endpoint-disk brackets of v_p along a curve (polyline), checked against the
/// curve bounds at the largest p.
Lemma42Report run_lemma42(const ExactSolution& sol, const Polyline& curve,
                          const Lemma42Params& params);

struct Theorem2Row {
    std::string region;
    double q = 0.0;
    std::vector<double> values;  // per h in the sweep
    std::vector<double> ratios;  // successive growth factors
};

struct Theorem2Params {
    std::vector<int> grid_ns{65, 129, 257};  // h = 1/32, 1/64, 1/128 on Q1
    std::vector<double> q_values{2, 4, 8};
};

struct Theorem2Report {
    std::vector<Theorem2Row> rows;
    bool one_sided_bounded = false;   // q=4, touching region: within 2x per step
    bool straddle_blows_up = false;   // q=4, straddling region: >= 2x per step
    double one_sided_max_ratio = 0.0;
    double straddle_min_ratio = 0.0;
};

/// Seminorm dichotomy for |grad grad_norm|^q on axis-touching vs axis-straddling
/// regions (plus the graph-boundary region where the quantity is bounded).
Theorem2Report run_theorem2(const ExactSolution& sol, const Theorem2Params& params);

struct AronssonParams {
    std::vector<int> grid_ns{65, 129, 257};  // h = 1/32, 1/64, 1/128
    std::uint64_t seed = 1;
    VerifyTolerances tol;
};

struct AronssonReport {
    std::vector<int> grid_ns;
    std::vector<double> axis_residual;  // max |r| over axis-centered tests, per h
    std::vector<double> quad_residual;  // max |r| over quadrant-interior tests, per h
    std::vector<double> axis_ratio;     // successive axis residual ratios
    std::vector<double> quad_ratio;
    bool full_square_fails = false;  // certificate verdict is fail at every h
    bool quadrants_pass = false;     // certify passes on each open quadrant
    std::string failing_tests;       // ids of axis tests that break the certificate
};

/// The counterexample discrimination: w = -log|grad u|, F = -omega perp(grad
/// u)/|grad u| for the Aronsson member on Q1. Axis-centered residuals persist
/// under refinement, quadrant-interior ones vanish; the full-square verdict is
/// fail while each open quadrant passes.
AronssonReport run_aronsson_discrimination(const AronssonParams& params);

/// Shared helper: the sector solve for the angle member (data -theta so the
/// worked orientation is negative).
DirichletProblem angle_sector_problem(int n);

/// Anchor node for the sector conjugate: the active node on the diagonal
/// closest to the outer arc (the minimum of the stream potential).
Point angle_sector_anchor(const DirichletProblem& pr);

}  // namespace imcflab
