#include "imcflab/kernels.hpp"

#include <atomic>
#include <vector>

namespace imcflab::kernels {

namespace {
constexpr std::size_t kBlock = 1024;

std::atomic<bool> g_parallel{true};

double sum_block(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double pairwise(std::vector<double>& v) {
    std::size_t n = v.size();
    while (n > 1) {
        std::size_t m = (n + 1) / 2;
        for (std::size_t i = 0; i < n / 2; ++i) v[i] = v[2 * i] + v[2 * i + 1];
        if (n & 1) v[n / 2] = v[n - 1];
        n = m;
    }
    return n ? v[0] : 0.0;
}

void cell_gradient_rows(int nx, double h, const double* u, double* gx, double* gy,
                        int j0, int j1) {
    const double inv2h = 1.0 / (2.0 * h);
    const int cw = nx - 1;
    for (int j = j0; j < j1; ++j) {
        const double* lo = u + static_cast<std::size_t>(j) * nx;
        const double* hi = lo + nx;
        double* rx = gx + static_cast<std::size_t>(j) * cw;
        double* ry = gy + static_cast<std::size_t>(j) * cw;
        for (int i = 0; i < cw; ++i) {
            rx[i] = (lo[i + 1] - lo[i] + hi[i + 1] - hi[i]) * inv2h;
            ry[i] = (hi[i] - lo[i] + hi[i + 1] - lo[i + 1]) * inv2h;
        }
    }
}

void node_gather_rows(int nx, int ny, double h, const double* wgx, const double* wgy,
                      double* out, int j0, int j1) {
    const int cw = nx - 1;
    const int ch = ny - 1;
    const double f = 0.5 * h;  // h^2 * (1/(2h))
    for (int j = j0; j < j1; ++j) {
        for (int i = 0; i < nx; ++i) {
            double acc = 0.0;
            if (i < cw && j < ch) {  // corner 00 in cell (i, j)
                const int c = j * cw + i;
                acc -= wgx[c] + wgy[c];
            }
            if (i > 0 && j < ch) {  // corner 10 in cell (i-1, j)
                const int c = j * cw + (i - 1);
                acc += wgx[c] - wgy[c];
            }
            if (i < cw && j > 0) {  // corner 01 in cell (i, j-1)
                const int c = (j - 1) * cw + i;
                acc += wgy[c] - wgx[c];
            }
            if (i > 0 && j > 0) {  // corner 11 in cell (i-1, j-1)
                const int c = (j - 1) * cw + (i - 1);
                acc += wgx[c] + wgy[c];
            }
            out[j * nx + i] = f * acc;
        }
    }
}
}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel_enabled(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

namespace serial {

double det_sum(std::span<const double> x) {
    const std::size_t nb = (x.size() + kBlock - 1) / kBlock;
    std::vector<double> blocks(nb ? nb : 1, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * kBlock;
        blocks[b] = sum_block(x.data() + lo, std::min(kBlock, x.size() - lo));
    }
    return pairwise(blocks);
}

void cell_gradient(int nx, int ny, double h, const double* u, double* gx, double* gy) {
    cell_gradient_rows(nx, h, u, gx, gy, 0, ny - 1);
}

void node_gather(int nx, int ny, double h, const double* wgx, const double* wgy,
                 double* out) {
    node_gather_rows(nx, ny, h, wgx, wgy, out, 0, ny);
}

}  // namespace serial

namespace parallel {

double det_sum(std::span<const double> x) {
    const std::size_t nb = (x.size() + kBlock - 1) / kBlock;
    std::vector<double> blocks(nb ? nb : 1, 0.0);
#pragma omp parallel for schedule(static)
    for (long b = 0; b < static_cast<long>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        blocks[b] = sum_block(x.data() + lo, std::min(kBlock, x.size() - lo));
    }
    return pairwise(blocks);
}

void cell_gradient(int nx, int ny, double h, const double* u, double* gx, double* gy) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny - 1; ++j) cell_gradient_rows(nx, h, u, gx, gy, j, j + 1);
}

void node_gather(int nx, int ny, double h, const double* wgx, const double* wgy,
                 double* out) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) node_gather_rows(nx, ny, h, wgx, wgy, out, j, j + 1);
}

}  // namespace parallel

double det_sum(std::span<const double> x) {
    return parallel_enabled() ? parallel::det_sum(x) : serial::det_sum(x);
}

}  // namespace imcflab::kernels
