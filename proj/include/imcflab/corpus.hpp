#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "imcflab/grid.hpp"
#include "imcflab/p_laplace.hpp"
#include "imcflab/streamlines.hpp"

namespace imcflab {

struct OmegaSample {
    int sign = 0;       // +1 / -1 when defined
    bool defined = false;
    bool unique = true;  // false when both orientations are admissible
};

/// Region descriptor for a member's natural domain.
struct Domain {
    enum class Kind { Rect, AnnularSector } kind = Kind::Rect;
    double x0 = -1, x1 = 1, y0 = -1, y1 = 1;       // Rect
    double rmin = 0, rmax = 0, tmin = 0, tmax = 0;  // AnnularSector

    bool contains(double x, double y) const;
    /// Distance to the region boundary, positive inside.
    double boundary_distance(double x, double y) const;
};

/// Analytic infinity-harmonic solution with exact evaluators.
struct ExactSolution {
    std::string name;
    Domain domain;
    std::string smoothness;  // where C^2, where merely C^1
    bool globally_orientable = true;

    std::function<double(double, double)> value;
    std::function<Point(double, double)> grad;
    std::function<double(double, double)> grad_norm;
    std::function<OmegaSample(double, double)> omega;
    /// Analytic Hessian where the member is C^2 (uxx, uxy, uyy); nullopt elsewhere.
    std::function<std::optional<std::array<double, 3>>(double, double)> hessian;

    double exact_w(double x, double y) const;
};

struct SampledSolution {
    ScalarField u;
    ScalarField grad_norm;
    OrientationField omega;
};

/// Exactly these members, in order: linear (xi = (0,1) by default), aronsson43,
/// angle (atan2 on the annular sector r in [1/2, 2], theta in [0, pi/2]).
std::vector<ExactSolution> members();
ExactSolution linear_member(Point xi = {0.0, 1.0});
ExactSolution aronsson_member();
ExactSolution angle_member();
const ExactSolution& member_by_name(const std::vector<ExactSolution>& all,
                                    const std::string& name);

/// Nodal sampling of the analytic evaluators; throws if the grid exits the
/// member's domain.
SampledSolution sample(const ExactSolution& sol, const Grid2D& grid);

/// w = -log(max(grad_norm, floor)) with a validity mask (false where the
/// gradient vanishes to the floor, e.g. the Aronsson origin).
std::pair<ScalarField, NodeMask> sample_w(const ExactSolution& sol, const Grid2D& grid,
                                          double floor = 1e-12);

/// A member rescaled per u~(x) = a u(r R x + x0) so grad u~(0) = e2 and the
/// orientation is negative (the normalized local frame). Provides the same
/// evaluators in the rescaled coordinates.
struct RescaledMember {
    ExactSolution base;
    Point x0;
    double a = 1.0, r = 1.0;
    std::array<double, 4> R{1, 0, 0, 1};  // row-major 2x2

    double value(double x, double y) const;
    Point grad(double x, double y) const;
    double grad_norm(double x, double y) const;
    double exact_w(double x, double y) const;
};

/// Chooses a, r, R for the member around x0 so that |grad u~ - e2| <= delta on
/// Q1 and the effective orientation is -1 (reflecting when the member's own
/// orientation is +1). pinch_rate bounds |grad grad| locally for the r choice.
RescaledMember rescale_to_unit(const ExactSolution& sol, Point x0, double delta);

struct Prop1Problem {
    DirichletProblem problem;
    RescaledMember member;
    double delta = 0.05;
    double sigma = 0.5;
    double lipschitz_bound = 0.0;  // delta / sqrt((1-sigma)^2 - delta^2)
};

/// The level-slab domain U = {a < u~ - sigma*x2 < b} with a, b the values at
/// (0, -3/4), (0, 3/4), Dirichlet data sampled from the rescaled member.
/// Throws (naming the node) if the gradient pinch fails on Q1.
Prop1Problem make_prop1_problem(const ExactSolution& sol, double delta, double sigma,
                                Point x0, int n);

}  // namespace imcflab
