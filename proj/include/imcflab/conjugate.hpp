#pragma once

#include <vector>

#include "imcflab/grid.hpp"
#include "imcflab/p_laplace.hpp"

namespace imcflab {

/// Conjugate stream function of a p-harmonic field: grad v = -|grad u|^{p-2}
/// perp(grad u), normalized so v(anchor) = gamma^{p-1}. v is reconstructed as
/// the least-squares potential (a Poisson solve) in an exponentially scaled
/// basis so both v and log v carry full relative accuracy across the field's
/// dynamic range (|grad u|^{p-1} spans many decades at large p).
struct ConjugatePair {
    ScalarField u;
    ScalarField v;        // plain values (0 where undefined / non-positive)
    ScalarField log_v;    // log v where v > 0 (0 elsewhere)
    NodeMask v_defined;   // nodes adjacent to an active cell
    NodeMask v_positive;  // subset where v > 0 and log_v is meaningful
    PExponent p;
    double gamma = 0.5;
    Point anchor;
    CellMask active;
    double curl_residual = 0.0;  // relative discrete weak-curl residual of the target
};

struct TransformedField {
    ScalarField w;       // log(v)/(1-p) where valid, 0 elsewhere
    NodeMask w_valid;
    VectorField F;       // (p-1)^{-1/(p-1)} e^w perp(grad u), cells
    CellMask f_valid;    // active cells whose v-average is positive
    PExponent p;
};

/// Pre: u is a converged p-harmonic field on the active cells (curl gate at
/// 1e-6 relative, else the construction is refused); gamma in (0, 1).
/// `active` defaults to all cells.
ConjugatePair conjugate(const ScalarField& u, const PExponent& p, double gamma, Point anchor,
                        const CellMask* active = nullptr);

/// w = log(v)/(1-p); F by the degeneracy-free formula with e^w evaluated as
/// v^{1/(1-p)} in log space on the cell-averaged v. `region` (nodes) defaults
/// to all defined nodes; v <= 0 inside the region is an error naming nodes.
TransformedField log_transform(const ConjugatePair& pair, const NodeMask* region = nullptr);

/// Weak residuals of the transformed equation: for each eta returns
/// int |grad w|^{p'-2} grad w . grad eta dx + int eta |grad w|^{p'} dx.
/// Cells with grad w = 0 contribute 0 (the p' < 2 limit).
std::vector<double> pprime_equation_residual(const TransformedField& t,
                                             const std::vector<TestFunction>& tests);

}  // namespace imcflab
