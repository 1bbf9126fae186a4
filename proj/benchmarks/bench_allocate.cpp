#include <benchmark/benchmark.h>

#include <random>

#include "defirisk/allocate.h"
#include "defirisk/risk.h"

namespace {

using namespace defirisk;

Universe random_universe(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> score(0.1, 10.0);
    std::vector<ProtocolRecord> ps;
    for (std::size_t i = 0; i < n; ++i) ps.push_back({"p" + std::to_string(i), "", "", score(rng), 1e6});
    return validate_universe(std::move(ps));
}

void BM_SolveErc(benchmark::State& state) {
    const auto m = normalize(build_risk_matrix(random_universe(static_cast<std::size_t>(state.range(0)), 1)));
    int iterations = 0;
    for (auto _ : state) {
        auto sol = solve_erc(m);
        iterations = sol.iterations;
        benchmark::DoNotOptimize(sol);
    }
    state.counters["solver_iterations"] = iterations;
}
BENCHMARK(BM_SolveErc)->RangeMultiplier(2)->Range(2, 64);

void BM_ClosedFormDiagonal(benchmark::State& state) {
    const auto m = normalize(build_risk_matrix(random_universe(static_cast<std::size_t>(state.range(0)), 1)));
    for (auto _ : state) benchmark::DoNotOptimize(closed_form_diagonal(m));
}
BENCHMARK(BM_ClosedFormDiagonal)->RangeMultiplier(2)->Range(2, 64);

void BM_SimplexProjection(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(state.range(0)));
    for (auto& x : v) x = nd(rng);
    for (auto _ : state) benchmark::DoNotOptimize(simplex_projection(v));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SimplexProjection)->RangeMultiplier(4)->Range(4, 4096)->Complexity(benchmark::oNLogN);

void BM_ErcGradient(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto m = normalize(build_risk_matrix(random_universe(n, 2)));
    const std::vector<double> w(n, 1.0 / static_cast<double>(n));
    for (auto _ : state) benchmark::DoNotOptimize(erc_gradient(w, m));
}
BENCHMARK(BM_ErcGradient)->RangeMultiplier(2)->Range(2, 64);

}  // namespace
