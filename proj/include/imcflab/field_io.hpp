#pragma once

#include <string>

#include "imcflab/grid.hpp"

namespace imcflab {

/// Plain-text CSV dumps, 17 significant digits, row-major.
/// Scalar header: x,y,value (one row per node).
/// Vector header: x,y,fx,fy (one row per cell).
void dump_scalar(const ScalarField& s, const std::string& path);
void dump_vector(const VectorField& f, const std::string& path);

/// Reconstructs the grid from the coordinate lattice (must be uniform within
/// 1e-9). Throws with the offending row/node on NaN rows, missing nodes, or a
/// non-uniform lattice.
ScalarField load_scalar(const std::string& path);

}  // namespace imcflab
