#include "ccdispatch/simulate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "ccdispatch/ptdf.hpp"
#include "ccdispatch/rng.hpp"

namespace ccd {

using nlohmann::json;

Method method_from_string(const std::string& s) {
  if (s == "apriori") return Method::kApriori;
  if (s == "incremental") return Method::kIncremental;
  if (s == "baseline") return Method::kBaseline;
  throw std::invalid_argument("unknown method \"" + s +
                              "\" (apriori|incremental|baseline)");
}

SamplingSpace space_from_string(const std::string& s) {
  if (s == "half-year") return SamplingSpace::kHalfYear;
  if (s == "three-month") return SamplingSpace::kThreeMonth;
  if (s == "similar") return SamplingSpace::kSimilar;
  throw std::invalid_argument("unknown sampling space \"" + s +
                              "\" (half-year|three-month|similar)");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::kApriori: return "apriori";
    case Method::kIncremental: return "incremental";
    case Method::kBaseline: return "baseline";
  }
  return "unknown";
}

const char* to_string(SamplingSpace s) {
  switch (s) {
    case SamplingSpace::kHalfYear: return "half-year";
    case SamplingSpace::kThreeMonth: return "three-month";
    case SamplingSpace::kSimilar: return "similar";
  }
  return "unknown";
}

SimulationConfig load_simulation_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": JSON parse error: " + e.what());
  }
  SimulationConfig c;
  c.case_path = j.at("case").get<std::string>();
  c.scenario_csv = j.at("scenarios").get<std::string>();
  for (const json& t : j.at("intervals"))
    c.intervals.push_back(parse_iso8601(t.get<std::string>()));
  if (j.contains("method")) c.method = method_from_string(j["method"]);
  if (j.contains("space")) c.space = space_from_string(j["space"]);
  if (j.contains("epsilon")) c.budget.epsilon = j["epsilon"].get<double>();
  if (j.contains("beta")) c.budget.beta = j["beta"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("wind_price")) c.wind_price = j["wind_price"].get<double>();
  if (j.contains("nonneg_eta")) c.nonneg_eta = j["nonneg_eta"].get<bool>();
  if (j.contains("half_year_days"))
    c.half_year_days = j["half_year_days"].get<int>();
  if (j.contains("three_month_days"))
    c.three_month_days = j["three_month_days"].get<int>();
  if (!c.budget.valid())
    throw std::runtime_error(path + ": epsilon/beta outside (0,1)");
  return c;
}

void RunReport::recompute() {
  evaluated = 0;
  failures = 0;
  violations = 0;
  double obj = 0, cost = 0, solve = 0, sampling = 0, nsz = 0;
  for (const IntervalRow& r : rows) {
    if (r.failed) {
      ++failures;
      continue;
    }
    ++evaluated;
    violations += r.violation ? 1 : 0;
    obj += r.objective;
    cost += r.realized_cost;
    solve += r.solve_seconds;
    sampling += r.sampling_seconds;
    nsz += double(r.n_used);
  }
  violation_rate = evaluated > 0 ? double(violations) / evaluated : 0.0;
  mean_objective = evaluated > 0 ? obj / evaluated : 0.0;
  mean_realized_cost = evaluated > 0 ? cost / evaluated : 0.0;
  mean_solve_seconds = evaluated > 0 ? solve / evaluated : 0.0;
  mean_sampling_seconds = evaluated > 0 ? sampling / evaluated : 0.0;
  mean_sample_size = evaluated > 0 ? nsz / evaluated : 0.0;
}

namespace {

Eigen::VectorXd region_capacity_weights(const GridCase& grid,
                                        const std::vector<std::string>& regions) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(regions.size());
  for (const WindFarm& f : grid.wind_farms) {
    auto it = std::find(regions.begin(), regions.end(), f.region);
    if (it == regions.end())
      throw std::runtime_error("case wind farm region \"" + f.region +
                               "\" missing from scenario store");
    w(it - regions.begin()) += f.capacity;
  }
  if (w.sum() <= 0.0) throw std::runtime_error("no wind capacity in case");
  return w;
}

}  // namespace

RunReport simulate_rolling(const GridCase& grid, const ScenarioStore& store,
                           const SimulationConfig& config) {
  const PtdfMatrix ptdf = compute_ptdf(grid);
  const Eigen::VectorXd weights = region_capacity_weights(grid, store.regions());

  RunReport report;
  for (std::size_t iv = 0; iv < config.intervals.size(); ++iv) {
    const Timestamp t = config.intervals[iv];
    IntervalRow row;
    row.timestamp = t;
    try {
      const auto idx = store.index_at(t);
      if (!idx)
        throw std::runtime_error("interval " + format_iso8601(t) +
                                 " not in the scenario timeline");
      const ScenarioRecord& now = store.record(*idx);

      const int lookback_days = config.space == SamplingSpace::kHalfYear
                                    ? config.half_year_days
                                    : config.three_month_days;
      const TimeWindow window{t - lookback_days * kSecondsPerDay, t};

      const CorrelationProfile profile =
          store.fit_correlations(window, weights);

      std::unique_ptr<ScenarioSampler> sampler;
      if (config.space == SamplingSpace::kSimilar)
        sampler = std::make_unique<NearestCursor>(store, profile, now.env,
                                                  window);
      else
        sampler = std::make_unique<RandomCursor>(
            store, window, derive_seed(config.seed, std::uint64_t(t)));

      DispatchSetup setup;
      setup.grid = &grid;
      setup.ptdf = &ptdf;
      setup.interval.demand.resize(grid.loads.size());
      for (std::size_t i = 0; i < grid.loads.size(); ++i)
        setup.interval.demand(i) = grid.loads[i].demand;
      setup.interval.wind_forecast.resize(grid.wind_farms.size());
      for (std::size_t i = 0; i < grid.wind_farms.size(); ++i)
        setup.interval.wind_forecast(i) =
            now.env.forecast_level * grid.wind_farms[i].capacity;
      setup.build.nonneg_eta = config.nonneg_eta;

      ScenarioProblem problem;
      DispatchSolution solution;
      std::vector<int> used;
      if (config.method == Method::kApriori) {
        AprioriResult r = apriori_dispatch(setup, store, *sampler, config.budget);
        if (r.sp.solution.status != LpStatus::kOptimal)
          throw std::runtime_error(std::string("solve failed: ") +
                                   to_string(r.sp.solution.status));
        problem = std::move(r.problem);
        solution = std::move(r.sp.solution);
        row.n_used = r.certificate.sample_count_n;
        row.complexity = r.certificate.complexity_h;
        row.epsilon_posterior = r.certificate.posterior_epsilon;
        row.solve_seconds = r.sp.report.solve_seconds;
        row.sampling_seconds = r.sampling_seconds;
        used = std::move(r.record_indices);
      } else {
        RiskTuningTrace tr =
            config.method == Method::kIncremental
                ? incremental_dispatch(setup, store, *sampler, config.budget)
                : sample_discard_baseline(setup, store, *sampler, config.budget);
        problem = std::move(tr.problem);
        solution = std::move(tr.solution);
        row.n_used = tr.certificate.sample_count_n;
        row.complexity = tr.certificate.complexity_h;
        row.epsilon_posterior = tr.certificate.posterior_epsilon;
        row.solve_seconds = tr.solve_seconds;
        row.sampling_seconds = tr.sampling_seconds;
        used = std::move(tr.record_indices);
      }
      row.objective = solution.objective;

      // Temporal hygiene: nothing sampled may touch the present or future.
      for (int ri : used)
        if (store.record(ri).timestamp >= t)
          throw std::logic_error("temporal hygiene violated at " +
                                 format_iso8601(t));

      const Eigen::VectorXd realized =
          farm_error_mw(grid, store.regions(), now.error);
      row.violation = check_feasibility(problem, solution, realized) > 1e-6;
      row.realized_cost =
          realized_cost(problem, solution, realized, config.wind_price);
    } catch (const std::logic_error&) {
      throw;  // invariant breaches are fatal
    } catch (const std::exception& e) {
      row.failed = true;
      row.note = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  report.recompute();
  return report;
}

double violation_test(const ScenarioProblem& problem,
                      const DispatchSolution& solution,
                      const std::vector<Eigen::VectorXd>& heldout, double tol) {
  if (heldout.empty()) return 0.0;
  FeasibilityEvaluator eval(problem, solution);
  std::size_t bad = 0;
  for (const Eigen::VectorXd& w : heldout)
    if (eval.worst_residual(w) > tol) ++bad;
  return double(bad) / double(heldout.size());
}

namespace {

json row_to_json(const IntervalRow& r) {
  return json{{"timestamp", format_iso8601(r.timestamp)},
              {"objective", r.objective},
              {"realized_cost", r.realized_cost},
              {"n_used", r.n_used},
              {"h", r.complexity},
              {"epsilon_posterior", r.epsilon_posterior},
              {"violation", r.violation},
              {"failed", r.failed},
              {"note", r.note},
              {"solve_seconds", r.solve_seconds},
              {"sampling_seconds", r.sampling_seconds}};
}

}  // namespace

std::string report_to_json(const RunReport& report) {
  json rows = json::array();
  for (const IntervalRow& r : report.rows) rows.push_back(row_to_json(r));
  const json j{{"rows", rows},
               {"aggregates",
                {{"evaluated", report.evaluated},
                 {"failures", report.failures},
                 {"violations", report.violations},
                 {"violation_rate", report.violation_rate},
                 {"mean_objective", report.mean_objective},
                 {"mean_realized_cost", report.mean_realized_cost},
                 {"mean_solve_seconds", report.mean_solve_seconds},
                 {"mean_sampling_seconds", report.mean_sampling_seconds},
                 {"mean_sample_size", report.mean_sample_size}}}};
  return j.dump(2);
}

RunReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunReport report;
  for (const json& rj : j.at("rows")) {
    IntervalRow r;
    r.timestamp = parse_iso8601(rj.at("timestamp").get<std::string>());
    r.objective = rj.at("objective").get<double>();
    r.realized_cost = rj.at("realized_cost").get<double>();
    r.n_used = rj.at("n_used").get<std::int64_t>();
    r.complexity = rj.at("h").get<int>();
    r.epsilon_posterior = rj.at("epsilon_posterior").get<double>();
    r.violation = rj.at("violation").get<bool>();
    r.failed = rj.at("failed").get<bool>();
    r.note = rj.at("note").get<std::string>();
    r.solve_seconds = rj.at("solve_seconds").get<double>();
    r.sampling_seconds = rj.at("sampling_seconds").get<double>();
    report.rows.push_back(std::move(r));
  }
  report.recompute();
  return report;
}

void emit_report(const RunReport& report, ReportFormat format,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  char buf[256];
  switch (format) {
    case ReportFormat::kJson:
      out << report_to_json(report) << '\n';
      break;
    case ReportFormat::kCsv:
      out << "timestamp,objective,realized_cost,n_used,h,epsilon_posterior,"
             "violation,failed,solve_seconds,sampling_seconds\n";
      for (const IntervalRow& r : report.rows) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%.10g,%.10g,%lld,%d,%.10g,%d,%d,%.6g,%.6g\n",
                      format_iso8601(r.timestamp).c_str(), r.objective,
                      r.realized_cost, static_cast<long long>(r.n_used),
                      r.complexity, r.epsilon_posterior, r.violation ? 1 : 0,
                      r.failed ? 1 : 0, r.solve_seconds, r.sampling_seconds);
        out << buf;
      }
      break;
    case ReportFormat::kLongCsv:
      out << "timestamp,series,value\n";
      for (const IntervalRow& r : report.rows) {
        if (r.failed) continue;
        const std::pair<const char*, double> series[] = {
            {"objective", r.objective},
            {"realized_cost", r.realized_cost},
            {"sample_size", double(r.n_used)},
            {"complexity", double(r.complexity)},
            {"epsilon_posterior", r.epsilon_posterior},
        };
        for (const auto& [name, value] : series) {
          std::snprintf(buf, sizeof(buf), "%s,%s,%.10g\n",
                        format_iso8601(r.timestamp).c_str(), name, value);
          out << buf;
        }
      }
      break;
  }
}

}  // namespace ccd
