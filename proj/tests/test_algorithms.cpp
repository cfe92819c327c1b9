#include <doctest.h>

#include <algorithm>
#include <set>

#include "ccdispatch/risk_tuning.hpp"
#include "ccdispatch/synth.hpp"
#include "testutil.hpp"

using namespace ccd;
using namespace ccdtest;

namespace {

GridCase tight_bus3() {
  GridCase c = load_case(data_path("bus3.json"));
  c.lines[2].capacity = 60.0;
  return c;
}

struct Fixture {
  GridCase grid;
  PtdfMatrix ptdf;
  DispatchInterval interval;

  Fixture(GridCase g, double forecast_pu) : grid(std::move(g)) {
    ptdf = compute_ptdf(grid);
    interval = nominal_interval(grid);
    for (int w = 0; w < interval.wind_forecast.size(); ++w)
      interval.wind_forecast(w) = forecast_pu * grid.wind_farms[w].capacity;
  }

  DispatchSetup setup() const {
    DispatchSetup s;
    s.grid = &grid;
    s.ptdf = &ptdf;
    s.interval = interval;
    return s;
  }

  SpResult solve(const Eigen::MatrixXd& scen) const {
    return solve_sp(build_sp(grid, ptdf, interval, scen));
  }
};

ScenarioStore synth_store(std::uint64_t seed, int count = 8640,
                          double skew = 1.0) {
  SynthConfig cfg;
  cfg.count = count;
  cfg.skew = skew;
  return ScenarioStore::from_records(synth_records(cfg, seed), cfg.regions);
}

}  // namespace

TEST_SUITE("algorithms") {

TEST_CASE("empty scenario set has no support") {
  Fixture fx(tight_bus3(), 0.5);
  const ScenarioProblem sp =
      build_sp(fx.grid, fx.ptdf, fx.interval, Eigen::MatrixXd(1, 0));
  const SpResult r = solve_sp(sp);
  REQUIRE(r.solution.status == LpStatus::kOptimal);
  CHECK(support_bruteforce(sp, r).empty());
  CHECK(support_dual(sp, r).empty());
}

TEST_CASE("one dominating scenario is the only support") {
  Fixture fx(tight_bus3(), 0.5);  // 30 + 20 MW forecast on the two farms
  Eigen::MatrixXd scen = Eigen::MatrixXd::Zero(2, 5);
  scen.row(0) << -28.0, 1.0, -2.0, 0.5, -1.5;  // west collapse dominates
  const ScenarioProblem sp = build_sp(fx.grid, fx.ptdf, fx.interval, scen);
  const SpResult r = solve_sp(sp);
  REQUIRE(r.solution.status == LpStatus::kOptimal);

  const std::vector<int> brute = support_bruteforce(sp, r);
  REQUIRE(brute.size() == 1);
  CHECK(brute[0] == 0);
  // And by the definition itself: removing it strictly lowers the cost.
  std::vector<int> keep{1, 2, 3, 4};
  const SpResult without = solve_sp(sp.subset(keep));
  CHECK(without.solution.objective <
        r.solution.objective - 1e-9 * (1.0 + r.solution.objective));

  CHECK(support_dual(sp, r) == brute);
}

TEST_CASE("duplicated binding scenario: neither copy is support") {
  Fixture fx(tight_bus3(), 0.5);
  Eigen::MatrixXd scen = Eigen::MatrixXd::Zero(2, 4);
  scen.row(0) << -28.0, -28.0, 1.0, -2.0;  // duplicated extreme
  const ScenarioProblem sp = build_sp(fx.grid, fx.ptdf, fx.interval, scen);
  const SpResult r = solve_sp(sp);
  REQUIRE(r.solution.status == LpStatus::kOptimal);
  CHECK(support_bruteforce(sp, r).empty());
}

TEST_CASE("all-interior scenarios: empty support with zero re-solves") {
  Fixture fx(GridCase(load_case(data_path("bus3.json"))), 0.5);
  Eigen::MatrixXd scen = Eigen::MatrixXd::Zero(2, 6);
  scen.row(0) << 0.5, -0.5, 0.2, -0.2, 0.1, -0.1;  // far inside every limit
  scen.row(1) << -0.2, 0.3, 0.1, -0.1, 0.05, 0.0;
  const ScenarioProblem sp = build_sp(fx.grid, fx.ptdf, fx.interval, scen);
  const SpResult r = solve_sp(sp);
  REQUIRE(r.solution.status == LpStatus::kOptimal);
  SupportDualStats stats;
  CHECK(support_dual(sp, r, {}, &stats).empty());
  CHECK(stats.candidates == 0);
  CHECK(stats.resolves == 0);
}

TEST_CASE("dual search equals brute force on randomized instances") {
  Rng rng(777);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    GridCase c = tight_bus3();
    c.lines[2].capacity = 45.0 + 30.0 * rng.uniform();
    c.loads[0].demand = 100.0 + 30.0 * rng.uniform();
    const double forecast_pu = 0.3 + 0.4 * rng.uniform();
    Fixture fx(std::move(c), forecast_pu);
    const int n = 1 + int(rng.below(10));
    // Draw raw errors strictly inside the physical range; errors that clamp
    // to the same boundary make duplicated scenarios, where the dual search
    // legitimately diverges from the removal definition (degeneracy).
    Eigen::MatrixXd scen(2, n);
    for (int f = 0; f < 2; ++f) {
      const double w_hat = fx.interval.wind_forecast(f);
      const double cap = fx.grid.wind_farms[f].capacity;
      const double lo = -w_hat + 0.5, hi = cap - w_hat - 0.5;
      for (int i = 0; i < n; ++i) scen(f, i) = lo + (hi - lo) * rng.uniform();
    }
    const ScenarioProblem sp = build_sp(fx.grid, fx.ptdf, fx.interval, scen);
    const SpResult r = solve_sp(sp);
    if (r.solution.status != LpStatus::kOptimal) continue;
    CHECK(support_dual(sp, r) == support_bruteforce(sp, r));
    ++checked;
  }
  CHECK(checked >= 25);
}

TEST_CASE("support on rts24 stays within the decision-variable bound") {
  const GridCase grid = load_case(data_path("rts24.json"));
  Fixture fx(GridCase(grid), 0.4);
  const ScenarioStore store = synth_store(404);
  Rng rng(405);
  std::vector<int> idx;
  for (int i = 0; i < 40; ++i) idx.push_back(int(rng.below(store.size())));
  const ScenarioProblem sp = build_sp(
      fx.grid, fx.ptdf, fx.interval, scenario_matrix(fx.grid, store, idx));
  const SpResult r = solve_sp(sp);
  REQUIRE(r.solution.status == LpStatus::kOptimal);
  const std::vector<int> s = support_dual(sp, r);
  CHECK(int(s.size()) <= helly_bound(sp));
  CHECK(helly_bound(sp) == 22);
}

TEST_CASE("apriori requests the worst-case sample size") {
  const GridCase grid = load_case(data_path("rts24.json"));
  Fixture fx(GridCase(grid), 0.4);
  const ScenarioStore store = synth_store(42, 25920);
  const CorrelationProfile profile = store.fit_correlations(store.span());
  const ScenarioRecord& target = store.record(int(store.size()) - 1);

  NearestCursor cursor(store, profile, target.env, store.span());
  const RiskBudget budget{0.05, 1e-3};
  const AprioriResult res = apriori_dispatch(fx.setup(), store, cursor, budget);
  CHECK(res.certificate.complexity_h == 22);
  CHECK(res.certificate.sample_count_n == 779);
  CHECK(res.problem.num_scenarios() == 779);
  CHECK(res.certificate.posterior_epsilon <= 0.05);
  CHECK(res.sp.solution.status == LpStatus::kOptimal);
}

TEST_CASE("apriori on bus3 uses sample_size(2)") {
  Fixture fx(tight_bus3(), 0.4);
  const ScenarioStore store = synth_store(7, 2000);
  const CorrelationProfile profile = store.fit_correlations(store.span());
  NearestCursor cursor(store, profile, store.record(100).env, store.span());
  const RiskBudget budget{0.05, 1e-3};
  const AprioriResult res = apriori_dispatch(fx.setup(), store, cursor, budget);
  CHECK(res.certificate.sample_count_n == sample_size(2, budget));
}

TEST_CASE("apriori resets when the store is too small") {
  const GridCase grid = load_case(data_path("rts24.json"));
  Fixture fx(GridCase(grid), 0.4);
  const ScenarioStore store = synth_store(43, 500);
  const CorrelationProfile profile = store.fit_correlations(store.span());
  NearestCursor cursor(store, profile, store.record(10).env, store.span());
  const RiskBudget budget{0.05, 1e-3};
  try {
    apriori_dispatch(fx.setup(), store, cursor, budget);
    FAIL("expected ResetRiskError");
  } catch (const ResetRiskError& e) {
    CHECK(e.available == 500);
    CHECK(e.achievable_epsilon ==
          doctest::Approx(posterior_risk(22, 500, 1e-3)).epsilon(1e-9));
    CHECK(e.achievable_epsilon > 0.05);
  }
}

TEST_CASE("incremental starts at 135 and obeys the trace invariants") {
  const GridCase grid = load_case(data_path("rts24.json"));
  Fixture fx(GridCase(grid), 0.45);
  const ScenarioStore store = synth_store(99, 25920);
  const CorrelationProfile profile = store.fit_correlations(store.span());
  const ScenarioRecord& target = store.record(int(store.size()) - 1);
  NearestCursor cursor(store, profile, target.env, store.span());
  const RiskBudget budget{0.05, 1e-3};

  const RiskTuningTrace tr =
      incremental_dispatch(fx.setup(), store, cursor, budget);
  REQUIRE(!tr.rows.empty());
  CHECK(tr.rows[0].sample_size == 135);
  CHECK(int(tr.rows.size()) <= helly_bound(tr.problem));

  for (std::size_t i = 0; i + 1 < tr.rows.size(); ++i) {
    CHECK(tr.rows[i].sample_size < tr.rows[i + 1].sample_size);
    CHECK(tr.rows[i].objective <=
          tr.rows[i + 1].objective +
              1e-9 * (1.0 + std::abs(tr.rows[i].objective)));
  }
  const TraceRow& last = tr.rows.back();
  CHECK(last.complexity <= last.iteration);
  CHECK(tr.certificate.posterior_epsilon <= budget.epsilon);
  if (tr.certificate.complexity_h >= 1)
    CHECK(binomial_tail(tr.certificate.complexity_h,
                        tr.certificate.sample_count_n,
                        budget.epsilon) <= budget.beta);
  CHECK(tr.solution.status == LpStatus::kOptimal);
  CHECK(int(tr.record_indices.size()) == tr.problem.num_scenarios());
}

TEST_CASE("complexity-one instance halts at the first iteration") {
  // One wind-collapse record dominates: losing 28.2 MW at the load bus
  // pushes extra flow down the derated line 1-3, and the ramp limits keep
  // the response from spreading it away, so that record's rows cap the
  // cheap unit below its unconstrained optimum. Every other record is
  // negligible, making the collapse the single support scenario.
  GridCase c = load_case(data_path("bus3.json"));
  c.lines[2].capacity = 65.0;
  for (Generator& g : c.generators) {
    g.ramp_up = 15.0;
    g.ramp_down = -15.0;
  }
  Fixture fx(std::move(c), 0.5);  // (30, 20) MW forecasts
  std::vector<ScenarioRecord> recs;
  for (int i = 0; i < 400; ++i) {
    ScenarioRecord r;
    r.timestamp = 300 * i;
    r.env.forecast_level = 0.5;
    r.env.ramp_rate = 0.0;
    r.env.temperature = 20.0 + 0.01 * (i % 100);
    r.env.humidity = 50.0 + 0.01 * (i % 90);
    r.error = Eigen::VectorXd::Zero(2);
    r.error(0) = i == 200 ? -0.47 : 0.001 * (i % 7);
    recs.push_back(r);
  }
  const ScenarioStore store =
      ScenarioStore::from_records(std::move(recs), {"west", "south"});
  const CorrelationProfile profile = store.fit_correlations(store.span());
  EnvironmentVector target = store.record(200).env;
  NearestCursor cursor(store, profile, target, store.span());
  const RiskBudget budget{0.05, 1e-3};

  const RiskTuningTrace tr =
      incremental_dispatch(fx.setup(), store, cursor, budget);
  REQUIRE(tr.rows.size() == 1);
  CHECK(tr.rows[0].sample_size == 135);
  CHECK(tr.rows[0].complexity == 1);
  // The dominating scenario must be inside the first draw for the
  // construction to mean anything.
  const auto& drawn = tr.record_indices;
  CHECK(std::find(drawn.begin(), drawn.end(), 200) != drawn.end());
  // Certify the construction with the definition-based oracle.
  const SpResult solved = solve_sp(tr.problem);
  const std::vector<int> brute = support_bruteforce(tr.problem, solved);
  CHECK(brute == support_dual(tr.problem, solved));
  CHECK(int(brute.size()) == 1);
}

TEST_CASE("store exhaustion raises an error carrying the partial trace") {
  Fixture fx(tight_bus3(), 0.5);
  const ScenarioStore store = synth_store(55, 100);  // < 135 records
  const CorrelationProfile profile = store.fit_correlations(store.span());
  NearestCursor cursor(store, profile, store.record(50).env, store.span());
  const RiskBudget budget{0.05, 1e-3};
  try {
    incremental_dispatch(fx.setup(), store, cursor, budget);
    FAIL("expected IncompleteTraceError");
  } catch (const IncompleteTraceError& e) {
    CHECK(e.partial.rows.empty());  // ran dry during the very first draw
  }
}

TEST_CASE("discard baseline: no support means a single iteration") {
  Fixture fx(GridCase(load_case(data_path("bus3.json"))), 0.5);
  // Scenarios cannot bind: negligible spread against generous limits.
  std::vector<ScenarioRecord> recs;
  for (int i = 0; i < 400; ++i) {
    ScenarioRecord r;
    r.timestamp = 300 * i;
    r.env.forecast_level = 0.5;
    r.env.ramp_rate = 0.0;
    r.env.temperature = 20.0 + 0.01 * i;
    r.env.humidity = 50.0;
    r.error = Eigen::VectorXd::Constant(2, 0.002 * ((i % 11) - 5));
    recs.push_back(r);
  }
  const ScenarioStore store =
      ScenarioStore::from_records(std::move(recs), {"west", "south"});
  const CorrelationProfile profile = store.fit_correlations(store.span());
  NearestCursor cursor(store, profile, store.record(0).env, store.span());
  const RiskBudget budget{0.05, 1e-3};

  const RiskTuningTrace tr =
      sample_discard_baseline(fx.setup(), store, cursor, budget);
  CHECK(tr.rows.size() == 1);
  CHECK(tr.rows[0].complexity == 0);
  CHECK(tr.rows[0].sample_size == sample_size(2, budget));
  CHECK(tr.certificate.posterior_epsilon <= budget.epsilon);
}

TEST_CASE("incremental beats the discard baseline on paired trials") {
  const GridCase grid = load_case(data_path("rts24.json"));
  int wins = 0;
  const int trials = 5;
  for (int trial = 0; trial < trials; ++trial) {
    const ScenarioStore store = synth_store(9000 + trial, 12000);
    const CorrelationProfile profile = store.fit_correlations(store.span());
    Rng rng(derive_seed(9000 + trial, 2));
    const ScenarioRecord& target =
        store.record(2000 + int(rng.below(store.size() - 2000)));
    Fixture fx(GridCase(grid), target.env.forecast_level);
    const RiskBudget budget{0.05, 1e-3};

    NearestCursor c1(store, profile, target.env, store.span());
    const RiskTuningTrace inc =
        incremental_dispatch(fx.setup(), store, c1, budget);
    NearestCursor c2(store, profile, target.env, store.span());
    const RiskTuningTrace dis =
        sample_discard_baseline(fx.setup(), store, c2, budget);

    const std::int64_t inc_terminal = inc.rows.back().sample_size;
    const std::int64_t dis_terminal = dis.rows.back().sample_size;
    if (inc.rows.size() <= dis.rows.size() && inc_terminal < dis_terminal)
      ++wins;
    CHECK(dis.certificate.posterior_epsilon <= budget.epsilon);
    CHECK(inc.certificate.posterior_epsilon <= budget.epsilon);
  }
  CHECK(wins >= 4);
}

}  // TEST_SUITE
