// Serial reference vs OpenMP kernel for the per-mode sweeps.

#include <benchmark/benchmark.h>

#include <vector>

#include "grushin/bounds.hpp"
#include "grushin/control.hpp"
#include "grushin/observability.hpp"
#include "grushin/spectral.hpp"

using namespace grushin;

namespace {

Execution mode(const benchmark::State& st) { return st.range(0) == 0 ? Execution::serial : Execution::parallel; }

void label(benchmark::State& st) { st.SetLabel(st.range(0) == 0 ? "serial" : "parallel"); }

std::vector<int> modes_1_to(int n) {
    std::vector<int> v;
    for (int k = 1; k <= n; ++k) v.push_back(k);
    return v;
}

void BM_GroundEigenpairs(benchmark::State& st) {
    const Grid1D g = make_grid(required_nx(1.0, 256));
    const auto ns = modes_1_to(256);
    for (auto _ : st) benchmark::DoNotOptimize(ground_eigenpairs(1.0, ns, g, mode(st)));
    label(st);
}

void BM_LowerBoundSweep(benchmark::State& st) {
    ProblemConfig cfg;
    cfg.gamma = 2.0;
    cfg.nx = 801;
    cfg = ProblemConfig::with_default_strip(cfg);
    const auto ns = modes_1_to(64);
    for (auto _ : st) benchmark::DoNotOptimize(uniform_sweep(cfg, ns, true, mode(st)));
    label(st);
}

void BM_CostSweep(benchmark::State& st) {
    ProblemConfig cfg;
    cfg.gamma = 0.5;
    cfg.T = 0.3;
    cfg.nx = 61;
    cfg.nt = 60;
    cfg = ProblemConfig::with_default_strip(cfg);
    const auto ns = modes_1_to(8);
    for (auto _ : st) benchmark::DoNotOptimize(uniform_sweep(cfg, ns, false, mode(st)));
    label(st);
}

void BM_ControlFull(benchmark::State& st) {
    ProblemConfig cfg;
    cfg.gamma = 0.5;
    cfg.T = 0.3;
    cfg.nx = 101;
    cfg.nt = 200;
    cfg = ProblemConfig::with_default_strip(cfg);
    const auto f0 = random_initial_modes(make_grid(cfg.nx), 4, 1);
    for (auto _ : st) benchmark::DoNotOptimize(control_full(cfg, f0, 1e-8, mode(st)));
    label(st);
}

void BM_Crossover(benchmark::State& st) {
    ProblemConfig cfg;
    cfg.gamma = 1.0;
    cfg.a = 0.3;
    std::vector<int> ns;
    for (int n = 32; n <= 256; n += 16) ns.push_back(n);
    const Grid1D g = make_grid(2271);
    for (auto _ : st) benchmark::DoNotOptimize(crossover_estimate(cfg, ns, g, mode(st)));
    label(st);
}

}  // namespace

BENCHMARK(BM_GroundEigenpairs)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LowerBoundSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CostSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ControlFull)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Crossover)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
