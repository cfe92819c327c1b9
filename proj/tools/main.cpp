// Command-line front end: certificate queries, synthetic scenario
// generation, one-shot dispatch, rolling simulation and sampling-space
// comparison.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "ccdispatch/certificates.hpp"
#include "ccdispatch/risk_tuning.hpp"
#include "ccdispatch/simulate.hpp"
#include "ccdispatch/synth.hpp"

using namespace ccd;

namespace {

std::vector<std::string> case_regions(const GridCase& grid) {
  std::vector<std::string> regions;
  for (const WindFarm& f : grid.wind_farms)
    if (std::find(regions.begin(), regions.end(), f.region) == regions.end())
      regions.push_back(f.region);
  return regions;
}

Eigen::VectorXd capacity_weights(const GridCase& grid,
                                 const std::vector<std::string>& regions) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(regions.size());
  for (const WindFarm& f : grid.wind_farms) {
    const auto it = std::find(regions.begin(), regions.end(), f.region);
    if (it != regions.end()) w(it - regions.begin()) += f.capacity;
  }
  return w;
}

nlohmann::json solution_json(const ScenarioProblem& problem,
                             const DispatchSolution& sol,
                             const Certificate& cert) {
  nlohmann::json j;
  j["status"] = to_string(sol.status);
  j["objective"] = sol.objective;
  j["g"] = std::vector<double>(sol.g.data(), sol.g.data() + sol.g.size());
  j["eta"] =
      std::vector<double>(sol.eta.data(), sol.eta.data() + sol.eta.size());
  std::vector<double> norms;
  for (int i = 0; i < problem.num_scenarios(); ++i)
    norms.push_back(sol.dual_block_norm(i));
  j["scenario_dual_norms"] = norms;
  j["certificate"] = {{"h", cert.complexity_h},
                      {"n", cert.sample_count_n},
                      {"epsilon_posterior", cert.posterior_epsilon}};
  return j;
}

int run_certify(int h, double epsilon, double beta, std::int64_t n) {
  if (n > 0) {
    std::printf("%.9g\n", posterior_risk(h, n, beta));
  } else {
    std::printf("%lld\n",
                static_cast<long long>(sample_size(h, {epsilon, beta})));
  }
  return 0;
}

int run_synth(const std::string& out, int count, std::uint64_t seed,
              double skew, const std::vector<std::string>& regions,
              const std::vector<double>& capacities) {
  SynthConfig cfg;
  cfg.count = count;
  cfg.skew = skew;
  if (!regions.empty()) {
    cfg.regions = regions;
    cfg.capacities =
        capacities.empty() ? std::vector<double>(regions.size(), 1200.0)
                           : capacities;
  }
  synth_generate(cfg, seed, out);
  std::printf("wrote %d records to %s\n", cfg.count, out.c_str());
  return 0;
}

int run_stats(const std::string& csv, std::vector<std::string> regions,
              const std::string& case_path, int window_days) {
  Eigen::VectorXd weights;
  if (!case_path.empty()) {
    const GridCase grid = load_case(case_path);
    if (regions.empty()) regions = case_regions(grid);
    weights = capacity_weights(grid, regions);
  }
  if (regions.empty())
    throw std::runtime_error("scenarios stats: give --case or --regions");
  const ScenarioStore store = ScenarioStore::ingest_csv(csv, regions);
  TimeWindow window = store.span();
  if (window_days > 0)
    window.begin = window.end - std::int64_t(window_days) * kSecondsPerDay;
  const CorrelationProfile p = store.fit_correlations(window, weights);

  std::printf("%-52s %s\n", "Correlation between forecasting error and",
              "Coefficient");
  std::printf("%-52s %+.2f\n", "Wind Power Forecasting Value", p.rho(0));
  std::printf("%-52s %+.2f\n", "(Absolute) Wind Power Changing Rate",
              p.rho(1));
  std::printf("%-52s %+.2f\n", "Temperature", p.rho(2));
  std::printf("%-52s %+.2f\n", "Relative Humidity", p.rho(3));
  for (const std::string& w : p.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  return 0;
}

int run_dispatch(const std::string& case_path, const std::string& csv,
                 double epsilon, double beta, const std::string& method,
                 const std::string& space, const std::string& at,
                 const std::string& out, const std::string& trace_path) {
  const GridCase grid = load_case(case_path);
  const PtdfMatrix ptdf = compute_ptdf(grid);
  const std::vector<std::string> regions = case_regions(grid);
  const ScenarioStore store = ScenarioStore::ingest_csv(csv, regions);
  const RiskBudget budget{epsilon, beta};
  if (!budget.valid())
    throw std::runtime_error("epsilon and beta must lie in (0, 1)");

  const Timestamp t =
      at.empty() ? store.records().back().timestamp : parse_iso8601(at);
  const auto idx = store.index_at(t);
  if (!idx)
    throw std::runtime_error("no scenario record at " + format_iso8601(t));
  const ScenarioRecord& now = store.record(*idx);

  const SamplingSpace sp_space = space_from_string(space);
  const int lookback = sp_space == SamplingSpace::kHalfYear ? 183 : 92;
  const TimeWindow window{t - lookback * kSecondsPerDay, t};
  const CorrelationProfile profile =
      store.fit_correlations(window, capacity_weights(grid, regions));

  std::unique_ptr<ScenarioSampler> sampler;
  if (sp_space == SamplingSpace::kSimilar)
    sampler = std::make_unique<NearestCursor>(store, profile, now.env, window);
  else
    sampler = std::make_unique<RandomCursor>(store, window, 0);

  DispatchSetup setup;
  setup.grid = &grid;
  setup.ptdf = &ptdf;
  setup.interval = nominal_interval(grid);
  for (std::size_t w = 0; w < grid.wind_farms.size(); ++w)
    setup.interval.wind_forecast(w) =
        now.env.forecast_level * grid.wind_farms[w].capacity;

  nlohmann::json j;
  const Method m = method_from_string(method);
  if (m == Method::kApriori) {
    const AprioriResult r = apriori_dispatch(setup, store, *sampler, budget);
    j = solution_json(r.problem, r.sp.solution, r.certificate);
  } else {
    const RiskTuningTrace tr =
        m == Method::kIncremental
            ? incremental_dispatch(setup, store, *sampler, budget)
            : sample_discard_baseline(setup, store, *sampler, budget);
    j = solution_json(tr.problem, tr.solution, tr.certificate);
    if (tr.duplicate_warning)
      std::fprintf(stderr,
                   "warning: duplicate scenarios detected; the support count "
                   "can underestimate the true complexity\n");
    if (!trace_path.empty()) write_trace_csv(trace_path, tr);
  }
  const std::string text = j.dump(2);
  if (out.empty()) {
    std::printf("%s\n", text.c_str());
  } else {
    std::ofstream f(out);
    f << text << '\n';
    std::printf("wrote %s\n", out.c_str());
  }
  return j["status"] == "optimal" ? 0 : 1;
}

int run_simulate(const std::string& config_path, std::uint64_t seed,
                 bool seed_given, const std::string& out_dir) {
  SimulationConfig config = load_simulation_config(config_path);
  if (seed_given) config.seed = seed;
  const GridCase grid = load_case(config.case_path);
  const ScenarioStore store =
      ScenarioStore::ingest_csv(config.scenario_csv, case_regions(grid));
  const RunReport report = simulate_rolling(grid, store, config);

  std::printf("intervals=%zu evaluated=%d failures=%d\n", report.rows.size(),
              report.evaluated, report.failures);
  std::printf("violation_rate=%.4f mean_cost=%.4f mean_n=%.1f\n",
              report.violation_rate, report.mean_realized_cost,
              report.mean_sample_size);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    emit_report(report, ReportFormat::kCsv, out_dir + "/report.csv");
    emit_report(report, ReportFormat::kJson, out_dir + "/report.json");
    emit_report(report, ReportFormat::kLongCsv, out_dir + "/report_long.csv");
    std::printf("wrote %s/report.{csv,json} and report_long.csv\n",
                out_dir.c_str());
  }
  return 0;
}

int run_compare(const std::string& config_path, const std::string& spaces_arg,
                const std::string& out_dir) {
  const SimulationConfig base = load_simulation_config(config_path);
  const GridCase grid = load_case(base.case_path);
  const ScenarioStore store =
      ScenarioStore::ingest_csv(base.scenario_csv, case_regions(grid));

  std::vector<SamplingSpace> spaces;
  {
    std::stringstream ss(spaces_arg);
    std::string item;
    while (std::getline(ss, item, ',')) spaces.push_back(space_from_string(item));
  }
  std::vector<RunReport> reports;
  for (const SamplingSpace s : spaces) {
    SimulationConfig c = base;
    c.space = s;
    reports.push_back(simulate_rolling(grid, store, c));
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      emit_report(reports.back(), ReportFormat::kCsv,
                  out_dir + "/report_" + std::string(to_string(s)) + ".csv");
    }
  }

  std::printf("%-26s", "Sampling Space");
  for (const SamplingSpace s : spaces) std::printf("%20s", to_string(s));
  std::printf("\n");
  auto row = [&](const char* name, auto value) {
    std::printf("%-26s", name);
    for (std::size_t i = 0; i < reports.size(); ++i)
      std::printf("%20.4f", value(reports[i]));
    std::printf("\n");
  };
  row("Setting Violation", [&](const RunReport&) { return base.budget.epsilon; });
  row("Actual Violation", [](const RunReport& r) { return r.violation_rate; });
  row("Average Cost ($)",
      [](const RunReport& r) { return r.mean_realized_cost; });
  row("Average Solving Time (s)",
      [](const RunReport& r) { return r.mean_solve_seconds; });
  row("Average Sampling Time (s)",
      [](const RunReport& r) { return r.mean_sampling_seconds; });
  int failures = 0;
  for (const RunReport& r : reports) failures += r.failures;
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-approach chance-constrained DC economic dispatch"};
  app.set_help_flag("--help", "Print help");
  app.require_subcommand(1);

  // certify
  int h = 1;
  double epsilon = 0.05, beta = 1e-3;
  std::int64_t n = 0;
  CLI::App* certify = app.add_subcommand(
      "certify", "Sample-size and posterior-risk certificates");
  certify->set_help_flag("--help", "Print help");
  certify->add_option("--h", h, "Sample complexity")->required();
  certify->add_option("--epsilon", epsilon, "Risk level in (0,1)");
  certify->add_option("--beta", beta, "Confidence parameter in (0,1)");
  certify->add_option("--n", n, "Sample count (prints posterior risk)");

  // scenarios synth / stats
  CLI::App* scenarios =
      app.add_subcommand("scenarios", "Scenario store utilities");
  scenarios->require_subcommand(1);
  std::string synth_out = "scenarios.csv";
  int synth_count = 25920;
  std::uint64_t synth_seed = 0;
  double synth_skew = 1.0;
  std::vector<std::string> synth_regions;
  std::vector<double> synth_caps;
  CLI::App* synth = scenarios->add_subcommand(
      "synth", "Generate a synthetic conditional scenario CSV");
  synth->add_option("--out", synth_out, "Output CSV path");
  synth->add_option("--count", synth_count, "Record count");
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--skew", synth_skew, "Conditional skew strength");
  synth->add_option("--regions", synth_regions, "Region keys");
  synth->add_option("--capacities", synth_caps, "Per-region capacity (MW)");

  std::string stats_csv, stats_case;
  std::vector<std::string> stats_regions;
  int stats_window = 0;
  CLI::App* stats = scenarios->add_subcommand(
      "stats", "Fit and print the correlation coefficients");
  stats->add_option("--csv", stats_csv, "Scenario CSV")->required();
  stats->add_option("--case", stats_case, "Case file (for regions/weights)");
  stats->add_option("--regions", stats_regions, "Region keys");
  stats->add_option("--window-days", stats_window,
                    "Lookback window in days (default: whole file)");

  // dispatch
  std::string d_case, d_csv, d_method = "incremental", d_space = "similar";
  std::string d_at, d_out, d_trace;
  CLI::App* dispatch =
      app.add_subcommand("dispatch", "Solve one dispatch interval");
  dispatch->add_option("--case", d_case, "Case JSON")->required();
  dispatch->add_option("--scenarios", d_csv, "Scenario CSV")->required();
  dispatch->add_option("--epsilon", epsilon, "Risk level");
  dispatch->add_option("--beta", beta, "Confidence parameter");
  dispatch->add_option("--method", d_method, "apriori|incremental|baseline");
  dispatch->add_option("--space", d_space, "half-year|three-month|similar");
  dispatch->add_option("--at", d_at, "Decision timestamp (default: last)");
  dispatch->add_option("--out", d_out, "Write the solution JSON here");
  dispatch->add_option("--trace", d_trace, "Write the risk-tuning trace CSV");

  // simulate
  std::string s_config, s_out;
  std::uint64_t s_seed = 0;
  CLI::App* simulate = app.add_subcommand("simulate", "Rolling-horizon run");
  simulate->add_option("--config", s_config, "Simulation config JSON")
      ->required();
  CLI::Option* seed_opt =
      simulate->add_option("--seed", s_seed, "Override the config seed");
  simulate->add_option("--out", s_out, "Output directory for reports");

  // compare
  std::string c_config, c_spaces = "half-year,three-month,similar", c_out;
  CLI::App* compare =
      app.add_subcommand("compare", "Compare sampling spaces side by side");
  compare->add_option("--config", c_config, "Simulation config JSON")
      ->required();
  compare->add_option("--spaces", c_spaces, "Comma-separated space list");
  compare->add_option("--out", c_out, "Output directory for per-space CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (certify->parsed()) return run_certify(h, epsilon, beta, n);
    if (scenarios->parsed()) {
      if (synth->parsed())
        return run_synth(synth_out, synth_count, synth_seed, synth_skew,
                         synth_regions, synth_caps);
      return run_stats(stats_csv, stats_regions, stats_case, stats_window);
    }
    if (dispatch->parsed())
      return run_dispatch(d_case, d_csv, epsilon, beta, d_method, d_space,
                          d_at, d_out, d_trace);
    if (simulate->parsed())
      return run_simulate(s_config, s_seed, seed_opt->count() > 0, s_out);
    if (compare->parsed()) return run_compare(c_config, c_spaces, c_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
