#pragma once

#include <functional>
#include <vector>

#include "imcflab/grid.hpp"

namespace imcflab {

struct StreamlinePath {
    std::vector<double> x, y;
    std::vector<double> grad_norm_along;
    std::vector<double> arclength;
    bool truncated = false;  // gradient fell below the floor en route

    std::size_t size() const { return x.size(); }
};

struct Polyline {
    std::vector<double> x, y;
    std::size_t size() const { return x.size(); }
};

struct OrientationField {
    Grid2D grid;
    std::vector<std::int8_t> omega;  // +1 / -1 where defined
    NodeMask defined;
};

struct LevelSetFamily {
    std::vector<double> t_values;
    std::vector<Polyline> curves;
    std::vector<double> m_t;
    CellMask M;  // rasterized region
};

/// Classical RK4 on gamma' = grad u / |grad u| (unit speed), bilinear
/// interpolation of the cell gradients. Terminates at the boundary margin or
/// max_len; a gradient below 1e-8 truncates the path with a flag.
StreamlinePath trace_streamline(const ScalarField& u, Point start, double step,
                                double max_len, double margin = -1.0);

/// Predictor along +-perp(grad u) with Newton projection back onto {u = level}
/// (20-step cap). `forward` picks the direction sign of the marching.
Polyline trace_level_set(const ScalarField& u, double level, Point seed, double step,
                         double max_len, bool forward = true, double margin = -1.0);

/// Local level-set monotonicity probe of |grad u| in the perp(grad u)
/// direction; omega = +1 if nondecreasing within 1e-6 slack, -1 if
/// nonincreasing, undefined if neither; ties broken to +1. A continuity pass
/// afterwards undefines nodes that disagree with an already-kept neighbor.
OrientationField detect_orientation(const ScalarField& u, const ScalarField& grad_norm,
                                    double r);

/// Level-set family for a field with pinch |grad u - e2| <= delta; traces L_t
/// for the configured t values and rasterizes M = union {x in L_t : x1 <= m_t}.
LevelSetFamily build_level_family(const ScalarField& u,
                                  const std::function<double(double)>& m,
                                  double delta, int n_levels = 21);

/// One-sided Hausdorff distance from points of a to polyline b.
double directed_hausdorff(const Polyline& a, const Polyline& b);

}  // namespace imcflab
