#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imcflab {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Uniform Cartesian grid. Scalars live on nodes, vectors on cell centers.
/// node(i, j) = (x0 + i*h, y0 + j*h), 0 <= i < nx, 0 <= j < ny.
struct Grid2D {
    double x0 = 0.0;
    double y0 = 0.0;
    double h = 1.0;
    int nx = 0;
    int ny = 0;

    Grid2D() = default;
    Grid2D(double x0_, double y0_, double h_, int nx_, int ny_);

    /// Q_r = (-r, r)^2 with n nodes per side.
    static Grid2D square(double r, int n);

    int n_nodes() const { return nx * ny; }
    int n_cells() const { return (nx - 1) * (ny - 1); }
    int cells_x() const { return nx - 1; }
    int cells_y() const { return ny - 1; }

    int node_index(int i, int j) const { return j * nx + i; }
    int cell_index(int i, int j) const { return j * (nx - 1) + i; }

    double node_x(int i) const { return x0 + i * h; }
    double node_y(int j) const { return y0 + j * h; }
    double cell_cx(int i) const { return x0 + (i + 0.5) * h; }
    double cell_cy(int j) const { return y0 + (j + 0.5) * h; }

    double xmax() const { return x0 + (nx - 1) * h; }
    double ymax() const { return y0 + (ny - 1) * h; }

    /// Distance from (x, y) to the grid's outer boundary (positive inside).
    double boundary_distance(double x, double y) const;

    bool same_as(const Grid2D& o, double tol = 1e-12) const;
};

struct ScalarField {
    Grid2D grid;
    std::vector<double> values;  // row-major, index = j*nx + i

    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double fill = 0.0);

    double& at(int i, int j) { return values[grid.node_index(i, j)]; }
    double at(int i, int j) const { return values[grid.node_index(i, j)]; }

    /// Throws if any value is non-finite or the length is wrong.
    void validate(const char* what = "ScalarField") const;

    /// Bilinear interpolation of nodal values at an interior point.
    double interpolate(double x, double y) const;
};

struct VectorField {
    Grid2D grid;
    std::vector<double> fx, fy;  // cell-centered, index = j*(nx-1) + i

    VectorField() = default;
    explicit VectorField(const Grid2D& g, double vx = 0.0, double vy = 0.0);

    void validate(const char* what = "VectorField") const;

    /// Bilinear interpolation on the cell-center lattice (clamped to its hull).
    Point interpolate(double x, double y) const;

    /// Max cell magnitude, optionally over a cell mask.
    double max_norm(const std::vector<std::uint8_t>* mask = nullptr) const;
};

using CellMask = std::vector<std::uint8_t>;  // one flag per cell
using NodeMask = std::vector<std::uint8_t>;  // one flag per node

/// Smooth compactly supported bump, profile exp(1 - 1/(1 - |x-c|^2/rho^2)),
/// identically zero on and outside the support circle. Gradient and Laplacian
/// are analytic; nothing here is ever finite-differenced.
struct TestFunction {
    Point center;
    double radius = 0.0;

    double value(double x, double y) const;
    Point gradient(double x, double y) const;
    double laplacian(double x, double y) const;

    /// True if the closed support lies strictly inside the grid interior.
    bool supported_inside(const Grid2D& g, double margin = 0.0) const;
};

/// Cell-centered gradient: each component is the average of the two parallel
/// one-sided differences across the cell. Exact for bilinear nodal data.
VectorField gradient(const ScalarField& u);

/// (a, b) -> (-b, a) per cell.
VectorField perp(const VectorField& g);

/// Midpoint-rule integral: sum over cells of h^2 * (nodal 4-average),
/// restricted to `mask` when given.
double integrate(const ScalarField& s, const CellMask* mask = nullptr);

/// Midpoint-rule integral of a cell-valued integrand.
double integrate_cells(const Grid2D& g, std::span<const double> cell_values,
                       const CellMask* mask = nullptr);

/// r(eta) = int F . grad(eta) dx + int eta * s dx by midpoint quadrature on
/// cells; small residuals certify div F = s weakly. Test supports must lie
/// inside the grid interior.
std::vector<double> weak_divergence_residual(const VectorField& F,
                                             const ScalarField& s,
                                             const std::vector<TestFunction>& tests,
                                             const CellMask* mask = nullptr);

/// Average a cell-valued quantity to nodes (mean over adjacent cells present
/// in `mask`); nodes with no adjacent masked cell get 0.
ScalarField cells_to_nodes(const Grid2D& g, std::span<const double> cell_values,
                           const CellMask* mask = nullptr);

/// Nodal 4-average per cell.
std::vector<double> nodes_to_cells(const ScalarField& s);

/// Cell magnitudes |F| as a vector of length n_cells.
std::vector<double> cell_norms(const VectorField& F);

}  // namespace imcflab
