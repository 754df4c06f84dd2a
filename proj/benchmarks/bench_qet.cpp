// bench_qet.cpp — Microbenchmarks for generator evaluation, propagation and oracle trajectories

#include "qet/mc_oracle.hpp"
#include "qet/tcl2.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace qet;

ChainSpec chain_of(int n) {
    return ChainSpec::nearest_neighbor(RealVector::LinSpaced(n, 1.5, 1.0), 0.1, 0.005);
}

void BM_Tcl2Apply(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Tcl2Generator gen(chain_of(n), NoiseSpec::homogeneous(n, 1.0, 0.3, 0.1));
    const ComplexMatrix rho = initial_excitation(0, n).matrix();
    double t = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gen.apply(t, rho));
        t += 1e-3;
    }
}
BENCHMARK(BM_Tcl2Apply)->Arg(2)->Arg(3)->Arg(4)->Arg(8);

void BM_PropagateTransient(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Tcl2Generator gen(chain_of(n), NoiseSpec::homogeneous(n, 1.0, 1.0, 0.1));
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.t_max = 10.0;
    cfg.store_states = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(propagate(gen, initial_excitation(0, n), cfg));
    }
}
BENCHMARK(BM_PropagateTransient)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_PropagateStationary(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Tcl2Generator gen(chain_of(n), NoiseSpec::homogeneous(n, 1.0, 0.1, 0.1));
    IntegratorConfig cfg;
    cfg.step = 0.005;
    cfg.t_max = 100.0;
    cfg.store_states = false;
    cfg.snapshot_stride = 100;
    for (auto _ : state) {
        benchmark::DoNotOptimize(propagate(gen, initial_excitation(0, n), cfg));
    }
}
BENCHMARK(BM_PropagateStationary)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_McTrajectories(benchmark::State& state) {
    const auto chain = chain_of(2);
    const auto noise = NoiseSpec::two_site(-1.0, 1.0, 0.3, 0.1);
    McConfig cfg;
    cfg.n_traj = 64;
    cfg.t_max = 10.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mc_average(chain, noise, cfg));
    }
    state.SetItemsProcessed(state.iterations() * cfg.n_traj);
}
BENCHMARK(BM_McTrajectories)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
