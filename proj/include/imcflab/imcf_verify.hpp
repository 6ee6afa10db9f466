#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imcflab/grid.hpp"
#include "imcflab/streamlines.hpp"

namespace imcflab {

struct VerifyTolerances {
    double tol_F = 1e-6;       // sup |F| <= 1 + tol_F
    double tol_align = 1e-3;   // L1 of |F.grad w - |grad w||
    double c0_div = 1.0;       // tol_div(h) = c0_div * h, calibrated on the circle solution
    double tol_HI = 1e-6;      // Huisken-Ilmanen violation allowance
};

struct ImcfCertificate {
    double sup_F_norm = 0.0;
    double alignment_residual_L1 = 0.0;
    std::vector<std::pair<int, double>> weak_div_residuals;  // (test id, residual)
    std::vector<std::pair<int, double>> hi_violations;       // (competitor id, lhs - rhs)+
    bool pass = false;
    VerifyTolerances thresholds;
    double tol_div = 0.0;  // c0_div * h actually used
    std::string failure;   // first violated condition, for reports
};

/// Definition-style certificate: |F| <= 1 (cellwise), F.grad w = |grad w|
/// (L1 residual; cells with |grad w| <= 1e-10 contribute 0), and div F =
/// |grad w| weakly against the test suite. Requires >= 20 tests.
ImcfCertificate certify(const ScalarField& w, const VectorField& F,
                        const std::vector<TestFunction>& tests, const VerifyTolerances& tol,
                        const CellMask* mask = nullptr,
                        const ScalarField* s_override = nullptr);

struct Theorem1Residuals {
    double eq4_residual_L1 = 0.0;
    std::vector<double> eq5_residuals;
};

/// Pointwise identity |grad g| perp(grad u)/|grad u| = omega grad g (L1) and
/// the weak identity div(perp(grad u)/|grad u|) = -omega |grad g|/g, with
/// g = grad_norm. Rejects cells with |grad u| <= 1e-10 inside the mask.
Theorem1Residuals theorem1_identities(const ScalarField& u, const OrientationField& omega,
                                      const ScalarField& grad_norm,
                                      const std::vector<TestFunction>& tests,
                                      const CellMask* mask = nullptr);

/// Bump competitors w~ = w + amp * eta with supports inside K; amplitudes
/// cycle {0.01, 0.1, 1} with random signs; seeded and reproducible.
std::vector<ScalarField> make_competitors(const ScalarField& w, const CellMask& K, int count,
                                          std::uint64_t seed);

/// For each competitor returns (lhs, rhs) of the Huisken-Ilmanen inequality
/// restricted to K: lhs = int_K (1+w)|grad w|, rhs = int_K |grad w~| + w~ |grad w|.
/// Competitors differing from w outside K are rejected.
std::vector<std::pair<double, double>> huisken_ilmanen_check(
    const ScalarField& w, const VectorField& F, const std::vector<ScalarField>& competitors,
    const CellMask& K);

/// Seeded bump suite: `count` test functions with radii log-uniform in
/// [rho_lo, rho_hi], centers where `interior_distance` exceeds radius + 0.02.
std::vector<TestFunction> make_test_suite(
    const Grid2D& g, int count, std::uint64_t seed, double rho_lo, double rho_hi,
    const std::function<double(double, double)>& interior_distance);

}  // namespace imcflab
