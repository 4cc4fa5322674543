#include <benchmark/benchmark.h>

#include "hbary/eval.hpp"
#include "hbary/synthgen.hpp"
#include "hbary/transport.hpp"
#include "hbary/tuning.hpp"

using namespace hbary;

namespace {

struct Instance {
    HeterogeneousDataset data;
    std::vector<CovariateSubset> subsets;
    Bandwidth h;
};

Instance missing_instance(std::size_t scale) {
    const auto g = gen_missing_test(1, 80 * scale, 80 * scale, 20 * scale, 20, 1);
    auto d = extend_covariates(g.train);
    const auto base = enumerate_subsets(d, 2, 5);
    const auto h = silverman_bandwidth(Standardization::fit(d.responses()).apply(d.responses()));
    auto subs = with_weights(base, lambda_weights(d, base, h));
    return {std::move(d), std::move(subs), h};
}

void BM_Objective(benchmark::State& state) {
    const auto in = missing_instance(state.range(0));
    const BarycenterProblem p(in.data, in.subsets, in.h);
    const auto y = p.x();
    for (auto _ : state) benchmark::DoNotOptimize(p.objective(y));
    state.SetComplexityN(static_cast<long>(p.size()));
}
BENCHMARK(BM_Objective)->Arg(1)->Arg(2)->Arg(4)->Complexity(benchmark::oNSquared);

void BM_Gradient(benchmark::State& state) {
    const auto in = missing_instance(state.range(0));
    const BarycenterProblem p(in.data, in.subsets, in.h);
    const auto y = p.x();
    for (auto _ : state) benchmark::DoNotOptimize(p.gradient_and_hessian(y));
    state.SetComplexityN(static_cast<long>(p.size()));
}
BENCHMARK(BM_Gradient)->Arg(1)->Arg(2)->Arg(4)->Complexity(benchmark::oNSquared);

void BM_Solve(benchmark::State& state) {
    const auto in = missing_instance(1);
    SolverConfig c;
    c.lambda_scale = 0.01;
    for (auto _ : state) benchmark::DoNotOptimize(solve(in.data, in.subsets, c));
}
BENCHMARK(BM_Solve)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
    const auto in = missing_instance(1);
    SolverConfig c;
    c.lambda_scale = 0.01;
    const auto sol = solve(in.data, in.subsets, c);
    const TransportMap map(sol);
    const CovariateRecord z{{"z1", 0.4}, {"z2", 0.6}};
    for (auto _ : state) benchmark::DoNotOptimize(map.simulate(map.prepare(z)));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
