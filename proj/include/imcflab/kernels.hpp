#pragma once

#include <cstddef>
#include <span>

namespace imcflab::kernels {

/// Parallel kernels use fixed-block decomposition so results are bitwise
/// identical to the serial reference for any thread count.

/// Deterministic sum: fixed 1024-element blocks, each summed left-to-right,
/// block sums combined by pairwise tree reduction.
double det_sum(std::span<const double> x);

namespace serial {
double det_sum(std::span<const double> x);

void cell_gradient(int nx, int ny, double h, const double* u,
                   double* gx, double* gy);

/// Nodal gather of h^2 * (wgx*bx + wgy*by) over the (up to 4) adjacent cells;
/// wgx/wgy are cell arrays, out has one entry per node.
void node_gather(int nx, int ny, double h, const double* wgx, const double* wgy,
                 double* out);
}  // namespace serial

namespace parallel {
double det_sum(std::span<const double> x);
void cell_gradient(int nx, int ny, double h, const double* u,
                   double* gx, double* gy);
void node_gather(int nx, int ny, double h, const double* wgx, const double* wgy,
                 double* out);
}  // namespace parallel

/// Project-wide switch. Defaults to parallel; tests flip it to compare.
bool parallel_enabled();
void set_parallel_enabled(bool on);

}  // namespace imcflab::kernels
