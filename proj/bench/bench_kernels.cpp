// Serial reference vs OpenMP path for the parallel kernels.
// Arg 1 selects the serial loop, 0 the OpenMP default thread count.
#include "silab/harness.hpp"
#include "silab/montecarlo.hpp"

#include <benchmark/benchmark.h>

using namespace silab;

namespace {

Exec exec_for(const benchmark::State& state)
{
    return state.range(0) == 1 ? Exec::serial() : Exec::parallel();
}

void BM_MuMonteCarlo(benchmark::State& state)
{
    OracleSpec spec;
    spec.kind = OracleKind::alternating;
    spec.eta = 0.5;
    const MonomialPoly he3 = MonomialPoly::hermite(3);
    const NoiseSpec noise{NoiseFamily::gaussian, 0.5};
    for (auto _ : state) {
        auto est = mu_monte_carlo(spec, he3, noise, 50, 6, 200000, 11, exec_for(state));
        benchmark::DoNotOptimize(est);
    }
}

void BM_DriftMonteCarlo(benchmark::State& state)
{
    OracleSpec spec;
    spec.kind = OracleKind::alternating;
    spec.eta = 0.5;
    const MonomialPoly he3 = MonomialPoly::hermite(3);
    for (auto _ : state) {
        auto est = drift_monte_carlo(spec, he3, NoiseSpec{}, 50, 0.3, 200000, 12, exec_for(state));
        benchmark::DoNotOptimize(est);
    }
}

void BM_Sweep(benchmark::State& state)
{
    SweepSpec sp;
    sp.base.teacher = TeacherSpec::canonical(25, MonomialPoly::hermite(3));
    sp.base.oracle.kind = OracleKind::alternating;
    sp.base.oracle.activation = MonomialPoly::hermite(3);
    sp.base.batch = 32;
    sp.base.init = InitMode::pinned_alignment;
    sp.base.master_seed = 13;
    sp.eta_grid = log_space(1e-3, 1.0, 8);
    sp.n_grid = log_space_int(1e3, 2e4, 6);
    sp.replicates = 4;
    for (auto _ : state) {
        auto res = sweep(sp, exec_for(state));
        benchmark::DoNotOptimize(res);
    }
}

} // namespace

BENCHMARK(BM_MuMonteCarlo)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DriftMonteCarlo)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Sweep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
