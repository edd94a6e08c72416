#include <benchmark/benchmark.h>

#include "dispersion_lab/estimate_experiments.hpp"
#include "dispersion_lab/grid_model.hpp"
#include "dispersion_lab/scattering.hpp"
#include "dispersion_lab/spectral_operator.hpp"
#include "dispersion_lab/stochastic.hpp"

namespace dl = dispersion_lab;

namespace {

dl::PotentialGrid gaussian_potential(std::size_t n) {
    return dl::sample_potential(dl::PotentialSpec::gaussian(3.0, 1.0), dl::Grid(40.0, n));
}

void BM_Eigensolve(benchmark::State& state) {
    const auto pot = gaussian_potential(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(dl::build_hamiltonian(pot));
}
BENCHMARK(BM_Eigensolve)->Arg(512)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_PropagateDense(benchmark::State& state) {
    dl::HamiltonianOptions o;
    o.backend = dl::SpectralBackend::dense;
    const auto H = dl::build_hamiltonian(gaussian_potential(static_cast<std::size_t>(state.range(0))), o);
    const dl::State u0 = dl::gaussian_state(H.grid(), 0.5, 1.0);
    double beta = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dl::propagate(H, beta, u0));
        beta += 0.01;
    }
}
BENCHMARK(BM_PropagateDense)->Arg(512)->Arg(2048)->Unit(benchmark::kMicrosecond);

void BM_PropagateSine(benchmark::State& state) {
    dl::HamiltonianOptions o;
    o.backend = dl::SpectralBackend::sine_transform;
    const auto H = dl::build_hamiltonian(
        dl::sample_potential(dl::PotentialSpec::zero(), dl::Grid(40.0, static_cast<std::size_t>(state.range(0)))), o);
    const dl::State u0 = dl::gaussian_state(H.grid(), 0.5, 1.0);
    double beta = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(dl::propagate(H, beta, u0));
        beta += 0.01;
    }
}
BENCHMARK(BM_PropagateSine)->Arg(2048)->Arg(16384)->Unit(benchmark::kMicrosecond);

void BM_JostWronskian(benchmark::State& state) {
    const auto pot = gaussian_potential(2048);
    for (auto _ : state) benchmark::DoNotOptimize(dl::jost_wronskian(pot, 1.0));
}
BENCHMARK(BM_JostWronskian)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
