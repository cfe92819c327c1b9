#include <benchmark/benchmark.h>

#include "ccdispatch/certificates.hpp"
#include "ccdispatch/risk_tuning.hpp"
#include "ccdispatch/synth.hpp"

using namespace ccd;

namespace {

std::string data_path(const char* name) {
  return std::string(CCD_DATA_DIR) + "/" + name;
}

struct Rts24 {
  GridCase grid = load_case(data_path("rts24.json"));
  PtdfMatrix ptdf = compute_ptdf(grid);
  ScenarioStore store = [] {
    SynthConfig cfg;
    return ScenarioStore::from_records(synth_records(cfg, 42), cfg.regions);
  }();
  CorrelationProfile profile = store.fit_correlations(store.span());
  DispatchInterval interval = [this] {
    DispatchInterval iv = nominal_interval(grid);
    const ScenarioRecord& now = store.records().back();
    for (int w = 0; w < iv.wind_forecast.size(); ++w)
      iv.wind_forecast(w) = now.env.forecast_level * grid.wind_farms[w].capacity;
    return iv;
  }();
};

Rts24& fixture() {
  static Rts24 fx;
  return fx;
}

}  // namespace

static void BM_SampleSize(benchmark::State& state) {
  const RiskBudget budget{0.05, 1e-3};
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_size(int(state.range(0)), budget));
}
BENCHMARK(BM_SampleSize)->Arg(1)->Arg(6)->Arg(22);

static void BM_ComputePtdf(benchmark::State& state) {
  Rts24& fx = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(compute_ptdf(fx.grid));
}
BENCHMARK(BM_ComputePtdf);

static void BM_NearestRanking(benchmark::State& state) {
  Rts24& fx = fixture();
  const EnvironmentVector target = fx.store.records().back().env;
  for (auto _ : state) {
    NearestCursor cursor(fx.store, fx.profile, target, fx.store.span());
    benchmark::DoNotOptimize(cursor.take(int(state.range(0))));
  }
}
BENCHMARK(BM_NearestRanking)->Arg(135)->Arg(779);

static void BM_SolveScenarioProblem(benchmark::State& state) {
  Rts24& fx = fixture();
  const EnvironmentVector target = fx.store.records().back().env;
  NearestCursor cursor(fx.store, fx.profile, target, fx.store.span());
  const std::vector<int> idx = cursor.take(int(state.range(0)));
  const ScenarioProblem sp = build_sp(
      fx.grid, fx.ptdf, fx.interval, scenario_matrix(fx.grid, fx.store, idx));
  for (auto _ : state) benchmark::DoNotOptimize(solve_sp(sp));
}
BENCHMARK(BM_SolveScenarioProblem)->Arg(0)->Arg(135)->Arg(324)->Arg(779);

static void BM_IncrementalDispatch(benchmark::State& state) {
  Rts24& fx = fixture();
  DispatchSetup setup;
  setup.grid = &fx.grid;
  setup.ptdf = &fx.ptdf;
  setup.interval = fx.interval;
  const EnvironmentVector target = fx.store.records().back().env;
  for (auto _ : state) {
    NearestCursor cursor(fx.store, fx.profile, target, fx.store.span());
    benchmark::DoNotOptimize(
        incremental_dispatch(setup, fx.store, cursor, {0.05, 1e-3}));
  }
}
BENCHMARK(BM_IncrementalDispatch);

BENCHMARK_MAIN();
