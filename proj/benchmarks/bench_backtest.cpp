#include <benchmark/benchmark.h>

#include <random>

#include "defirisk/backtest.h"

namespace {

using namespace defirisk;

struct Fixture {
    Universe universe;
    YieldPanel panel;
    Date start = make_date(2021, 1, 1);
    Date end;
};

// n protocols over `days` days; every fifth protocol misses each seventh day
// so the active set changes and forward-fill kicks in.
Fixture make_fixture(std::size_t n, int days) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> score(0.1, 1.0), apy(0.0, 0.2);
    Fixture f;
    f.end = f.start + std::chrono::days{days - 1};
    std::vector<ProtocolRecord> ps;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = "p" + std::to_string(i);
        ps.push_back({id, id, "chain", score(rng), 1e6 * static_cast<double>(i + 1)});
        std::vector<DatedSeries::Entry> e;
        for (int d = 0; d < days; ++d) {
            if (i % 5 == 4 && d % 7 == 6) continue;
            e.emplace_back(f.start + std::chrono::days{d}, apy(rng));
        }
        f.panel.series.emplace(id, DatedSeries(std::move(e)));
    }
    f.universe = validate_universe(std::move(ps));
    return f;
}

void BM_Backtest(benchmark::State& state) {
    const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 365);
    BacktestConfig cfg;
    cfg.start = f.start;
    cfg.end = f.end;
    cfg.method = static_cast<Method>(state.range(1));
    cfg.max_gap_fill_days = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_backtest(cfg, f.universe, f.panel));
    state.SetItemsProcessed(state.iterations() * 365);
}
BENCHMARK(BM_Backtest)
    ->ArgsProduct({{5, 20, 50}, {static_cast<int>(Method::Ew), static_cast<int>(Method::Erc)}})
    ->Unit(benchmark::kMillisecond);

}  // namespace
