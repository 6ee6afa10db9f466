#include "imcflab/imcf_verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "imcflab/kernels.hpp"
#include "imcflab/rng.hpp"

namespace imcflab {

namespace {
constexpr double kGradFloor = 1e-10;
}

ImcfCertificate certify(const ScalarField& w, const VectorField& F,
                        const std::vector<TestFunction>& tests, const VerifyTolerances& tol,
                        const CellMask* mask, const ScalarField* s_override) {
    w.validate("certify: w");
    F.validate("certify: F");
    if (!w.grid.same_as(F.grid)) throw std::invalid_argument("certify: grid mismatch");
    if (tests.size() < 20)
        throw std::invalid_argument("certify: need at least 20 test functions");
    const Grid2D& g = w.grid;

    ImcfCertificate cert;
    cert.thresholds = tol;
    cert.tol_div = tol.c0_div * g.h;
    cert.sup_F_norm = F.max_norm(mask);

    const VectorField gw = gradient(w);
    std::vector<double> align(static_cast<std::size_t>(g.n_cells()), 0.0);
    for (int c = 0; c < g.n_cells(); ++c) {
        if (mask && !(*mask)[c]) continue;
        const double gn = std::hypot(gw.fx[c], gw.fy[c]);
        if (gn <= kGradFloor) continue;  // F is unconstrained where grad w vanishes
        align[c] = std::abs(F.fx[c] * gw.fx[c] + F.fy[c] * gw.fy[c] - gn);
    }
    cert.alignment_residual_L1 = integrate_cells(g, align, mask);

    ScalarField s;
    if (s_override) {
        s = *s_override;
    } else {
        std::vector<double> gn = cell_norms(gw);
        if (mask)
            for (int c = 0; c < g.n_cells(); ++c)
                if (!(*mask)[c]) gn[c] = 0.0;
        s = cells_to_nodes(g, gn, mask);
    }
    const std::vector<double> res = weak_divergence_residual(F, s, tests, mask);
    for (std::size_t t = 0; t < res.size(); ++t)
        cert.weak_div_residuals.emplace_back(static_cast<int>(t), res[t]);

    cert.pass = true;
    if (cert.sup_F_norm > 1.0 + tol.tol_F) {
        cert.pass = false;
        cert.failure = "sup|F| exceeds 1";
    } else if (cert.alignment_residual_L1 > tol.tol_align) {
        cert.pass = false;
        cert.failure = "alignment residual exceeds tolerance";
    } else {
        for (const auto& [id, r] : cert.weak_div_residuals) {
            if (std::abs(r) > cert.tol_div) {
                cert.pass = false;
                cert.failure = "weak divergence residual exceeds tolerance at test " +
                               std::to_string(id);
                break;
            }
        }
    }
    return cert;
}

Theorem1Residuals theorem1_identities(const ScalarField& u, const OrientationField& omega,
                                      const ScalarField& grad_norm,
                                      const std::vector<TestFunction>& tests,
                                      const CellMask* mask) {
    u.validate("theorem1_identities: u");
    grad_norm.validate("theorem1_identities: grad_norm");
    if (!u.grid.same_as(grad_norm.grid) || !u.grid.same_as(omega.grid))
        throw std::invalid_argument("theorem1_identities: grid mismatch");
    const Grid2D& g = u.grid;

    const VectorField gu = gradient(u);
    const VectorField gg = gradient(grad_norm);

    // cell omega: all four corner nodes must agree and be defined
    std::vector<double> om(static_cast<std::size_t>(g.n_cells()), 0.0);
    CellMask usable = mask ? *mask : CellMask(g.n_cells(), 1);
    for (int cj = 0; cj < g.cells_y(); ++cj)
        for (int ci = 0; ci < g.cells_x(); ++ci) {
            const int c = g.cell_index(ci, cj);
            if (!usable[c]) continue;
            const int n[4] = {g.node_index(ci, cj), g.node_index(ci + 1, cj),
                              g.node_index(ci, cj + 1), g.node_index(ci + 1, cj + 1)};
            bool ok = true;
            for (int q = 0; q < 4 && ok; ++q) ok = omega.defined[n[q]] != 0;
            if (ok)
                for (int q = 1; q < 4 && ok; ++q) ok = omega.omega[n[q]] == omega.omega[n[0]];
            if (!ok) {
                usable[c] = 0;
                continue;
            }
            om[c] = omega.omega[n[0]];
        }

    std::vector<double> e4(static_cast<std::size_t>(g.n_cells()), 0.0);
    std::vector<double> vx(static_cast<std::size_t>(g.n_cells()), 0.0);
    std::vector<double> vy(static_cast<std::size_t>(g.n_cells()), 0.0);
    std::vector<double> src(static_cast<std::size_t>(g.n_cells()), 0.0);
    for (int c = 0; c < g.n_cells(); ++c) {
        if (!usable[c]) continue;
        const double gn = std::hypot(gu.fx[c], gu.fy[c]);
        if (gn <= kGradFloor)
            throw std::invalid_argument("theorem1_identities: |grad u| vanishes at cell " +
                                        std::to_string(c));
        const double mag = std::hypot(gg.fx[c], gg.fy[c]);
        // perp(grad u) = (-uy, ux)
        const double px = -gu.fy[c] / gn, py = gu.fx[c] / gn;
        e4[c] = std::hypot(mag * px - om[c] * gg.fx[c], mag * py - om[c] * gg.fy[c]);
        vx[c] = px;
        vy[c] = py;
        src[c] = 0.0;  // filled below from nodal g
    }

    Theorem1Residuals out;
    out.eq4_residual_L1 = integrate_cells(g, e4, &usable);

    // eq5: div(perp/|.|) = -omega |grad g| / g, with s nodal from cell values
    std::vector<double> s_cells(static_cast<std::size_t>(g.n_cells()), 0.0);
    const std::vector<double> gnod = nodes_to_cells(grad_norm);
    for (int c = 0; c < g.n_cells(); ++c) {
        if (!usable[c]) continue;
        const double mag = std::hypot(gg.fx[c], gg.fy[c]);
        s_cells[c] = -om[c] * mag / gnod[c];
    }
    const ScalarField s_nodal = cells_to_nodes(g, s_cells, &usable);
    VectorField V(g);
    V.fx = vx;
    V.fy = vy;
    out.eq5_residuals = weak_divergence_residual(V, s_nodal, tests, &usable);
    return out;
}

std::vector<ScalarField> make_competitors(const ScalarField& w, const CellMask& K, int count,
                                          std::uint64_t seed) {
    const Grid2D& g = w.grid;
    if (static_cast<int>(K.size()) != g.n_cells())
        throw std::invalid_argument("make_competitors: bad mask");
    // bounding box of K and a cell-distance map to its complement
    double kx0 = 1e300, kx1 = -1e300, ky0 = 1e300, ky1 = -1e300;
    for (int cj = 0; cj < g.cells_y(); ++cj)
        for (int ci = 0; ci < g.cells_x(); ++ci)
            if (K[g.cell_index(ci, cj)]) {
                kx0 = std::min(kx0, g.cell_cx(ci));
                kx1 = std::max(kx1, g.cell_cx(ci));
                ky0 = std::min(ky0, g.cell_cy(cj));
                ky1 = std::max(ky1, g.cell_cy(cj));
            }
    if (kx0 > kx1) throw std::invalid_argument("make_competitors: empty mask");

    auto inside_K = [&](double x, double y, double rho) {
        // the bump support (circle of radius rho) must stay in K cells
        const int i0 = std::max(0, static_cast<int>((x - rho - g.x0) / g.h) - 1);
        const int i1 = std::min(g.cells_x() - 1, static_cast<int>((x + rho - g.x0) / g.h) + 1);
        const int j0 = std::max(0, static_cast<int>((y - rho - g.y0) / g.h) - 1);
        const int j1 = std::min(g.cells_y() - 1, static_cast<int>((y + rho - g.y0) / g.h) + 1);
        for (int cj = j0; cj <= j1; ++cj)
            for (int ci = i0; ci <= i1; ++ci) {
                const double dx = g.cell_cx(ci) - x, dy = g.cell_cy(cj) - y;
                if (std::hypot(dx, dy) <= rho + 0.75 * g.h && !K[g.cell_index(ci, cj)])
                    return false;
            }
        return true;
    };

    Rng rng(seed);
    const double amps[3] = {0.01, 0.1, 1.0};
    std::vector<ScalarField> out;
    int attempts = 0;
    while (static_cast<int>(out.size()) < count && attempts < 100000) {
        ++attempts;
        const double rho = rng.uniform(0.05, 0.3);
        const double x = rng.uniform(kx0, kx1);
        const double y = rng.uniform(ky0, ky1);
        if (!inside_K(x, y, rho + 0.02)) continue;
        const double amp = amps[out.size() % 3] * rng.sign();
        TestFunction eta{{x, y}, rho};
        ScalarField cw = w;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                cw.values[g.node_index(i, j)] += amp * eta.value(g.node_x(i), g.node_y(j));
        out.push_back(std::move(cw));
    }
    if (static_cast<int>(out.size()) < count)
        throw std::runtime_error("make_competitors: could not place competitors inside K");
    return out;
}

std::vector<std::pair<double, double>> huisken_ilmanen_check(
    const ScalarField& w, const VectorField& F, const std::vector<ScalarField>& competitors,
    const CellMask& K) {
    w.validate("huisken_ilmanen_check: w");
    F.validate("huisken_ilmanen_check: F");
    const Grid2D& g = w.grid;
    if (static_cast<int>(K.size()) != g.n_cells())
        throw std::invalid_argument("huisken_ilmanen_check: bad mask");

    const VectorField gw = gradient(w);
    const std::vector<double> gwn = cell_norms(gw);
    const std::vector<double> w_cells = nodes_to_cells(w);

    std::vector<double> lhs_terms(static_cast<std::size_t>(g.n_cells()), 0.0);
    for (int c = 0; c < g.n_cells(); ++c)
        if (K[c]) lhs_terms[c] = (1.0 + w_cells[c]) * gwn[c];
    const double lhs = integrate_cells(g, lhs_terms, &K);

    // nodes strictly interior to K (all adjacent cells in K) may differ
    NodeMask may_differ(static_cast<std::size_t>(g.n_nodes()), 0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            bool all = true, any = false;
            for (int dj = -1; dj <= 0; ++dj)
                for (int di = -1; di <= 0; ++di) {
                    const int ci = i + di, cj = j + dj;
                    if (ci < 0 || cj < 0 || ci >= g.cells_x() || cj >= g.cells_y()) continue;
                    any = true;
                    if (!K[g.cell_index(ci, cj)]) all = false;
                }
            may_differ[g.node_index(i, j)] = (any && all) ? 1 : 0;
        }

    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 0; k < competitors.size(); ++k) {
        const ScalarField& wt = competitors[k];
        wt.validate("huisken_ilmanen_check: competitor");
        if (!wt.grid.same_as(g))
            throw std::invalid_argument("huisken_ilmanen_check: competitor grid mismatch");
        for (int q = 0; q < g.n_nodes(); ++q)
            if (!may_differ[q] && wt.values[q] != w.values[q])
                throw std::invalid_argument("huisken_ilmanen_check: competitor " +
                                            std::to_string(k) + " differs from w outside K");
        const VectorField gwt = gradient(wt);
        const std::vector<double> wt_cells = nodes_to_cells(wt);
        std::vector<double> rhs_terms(static_cast<std::size_t>(g.n_cells()), 0.0);
        for (int c = 0; c < g.n_cells(); ++c)
            if (K[c])
                rhs_terms[c] = std::hypot(gwt.fx[c], gwt.fy[c]) + wt_cells[c] * gwn[c];
        out.emplace_back(lhs, integrate_cells(g, rhs_terms, &K));
    }
    return out;
}

std::vector<TestFunction> make_test_suite(
    const Grid2D& g, int count, std::uint64_t seed, double rho_lo, double rho_hi,
    const std::function<double(double, double)>& interior_distance) {
    Rng rng(seed);
    std::vector<TestFunction> out;
    int attempts = 0;
    while (static_cast<int>(out.size()) < count && attempts < 200000) {
        ++attempts;
        const double x = rng.uniform(g.x0, g.xmax());
        const double y = rng.uniform(g.y0, g.ymax());
        const double rho = std::exp(rng.uniform(std::log(rho_lo), std::log(rho_hi)));
        if (interior_distance(x, y) > rho + 0.02) out.push_back(TestFunction{{x, y}, rho});
    }
    if (static_cast<int>(out.size()) < count)
        throw std::runtime_error("make_test_suite: could not place test functions");
    return out;
}

}  // namespace imcflab
