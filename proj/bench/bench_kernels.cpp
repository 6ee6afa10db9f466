// Serial vs OpenMP kernel comparison on the hot loops (cell gradients, nodal
// gather, deterministic reduction). Run with --benchmark_filter=... as usual.
#include <benchmark/benchmark.h>

#include <vector>

#include "imcflab/grid.hpp"
#include "imcflab/kernels.hpp"
#include "imcflab/rng.hpp"

namespace k = imcflab::kernels;

namespace {

struct Fixture {
    int n;
    imcflab::Grid2D g;
    std::vector<double> u, gx, gy, out;
    explicit Fixture(int n_)
        : n(n_),
          g(imcflab::Grid2D::square(1.0, n_)),
          u(static_cast<std::size_t>(g.n_nodes())),
          gx(static_cast<std::size_t>(g.n_cells())),
          gy(static_cast<std::size_t>(g.n_cells())),
          out(static_cast<std::size_t>(g.n_nodes())) {
        imcflab::Rng rng(7);
        for (auto& v : u) v = rng.uniform(-1.0, 1.0);
    }
};

void bm_gradient_serial(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        k::serial::cell_gradient(f.g.nx, f.g.ny, f.g.h, f.u.data(), f.gx.data(), f.gy.data());
        benchmark::ClobberMemory();
    }
}

void bm_gradient_omp(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        k::parallel::cell_gradient(f.g.nx, f.g.ny, f.g.h, f.u.data(), f.gx.data(), f.gy.data());
        benchmark::ClobberMemory();
    }
}

void bm_gather_serial(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    k::serial::cell_gradient(f.g.nx, f.g.ny, f.g.h, f.u.data(), f.gx.data(), f.gy.data());
    for (auto _ : state) {
        k::serial::node_gather(f.g.nx, f.g.ny, f.g.h, f.gx.data(), f.gy.data(), f.out.data());
        benchmark::ClobberMemory();
    }
}

void bm_gather_omp(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    k::serial::cell_gradient(f.g.nx, f.g.ny, f.g.h, f.u.data(), f.gx.data(), f.gy.data());
    for (auto _ : state) {
        k::parallel::node_gather(f.g.nx, f.g.ny, f.g.h, f.gx.data(), f.gy.data(), f.out.data());
        benchmark::ClobberMemory();
    }
}

void bm_sum_serial(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(k::serial::det_sum(f.u));
}

void bm_sum_omp(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(k::parallel::det_sum(f.u));
}

}  // namespace

BENCHMARK(bm_gradient_serial)->Arg(129)->Arg(513)->Arg(1025);
BENCHMARK(bm_gradient_omp)->Arg(129)->Arg(513)->Arg(1025);
BENCHMARK(bm_gather_serial)->Arg(129)->Arg(513)->Arg(1025);
BENCHMARK(bm_gather_omp)->Arg(129)->Arg(513)->Arg(1025);
BENCHMARK(bm_sum_serial)->Arg(513)->Arg(1025);
BENCHMARK(bm_sum_omp)->Arg(513)->Arg(1025);

BENCHMARK_MAIN();
