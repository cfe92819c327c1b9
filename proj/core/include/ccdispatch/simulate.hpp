#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccdispatch/grid.hpp"
#include "ccdispatch/risk_tuning.hpp"
#include "ccdispatch/scenario_store.hpp"
#include "ccdispatch/timeparse.hpp"

namespace ccd {

enum class Method { kApriori, kIncremental, kBaseline };
enum class SamplingSpace { kHalfYear, kThreeMonth, kSimilar };

Method method_from_string(const std::string& s);
SamplingSpace space_from_string(const std::string& s);
const char* to_string(Method m);
const char* to_string(SamplingSpace s);

struct SimulationConfig {
  std::string case_path;
  std::string scenario_csv;
  std::vector<Timestamp> intervals;
  Method method = Method::kIncremental;
  SamplingSpace space = SamplingSpace::kSimilar;
  RiskBudget budget{};
  std::uint64_t seed = 0;
  double wind_price = 3.0;
  bool nonneg_eta = false;
  int half_year_days = 183;
  int three_month_days = 92;  // also the similar-environment search space
};

/// Parses the simulate/compare JSON config (fields mirror SimulationConfig;
/// intervals are ISO-8601 strings).
SimulationConfig load_simulation_config(const std::string& path);

struct IntervalRow {
  Timestamp timestamp = 0;
  double objective = 0.0;
  double realized_cost = 0.0;
  std::int64_t n_used = 0;
  int complexity = 0;
  double epsilon_posterior = 0.0;
  bool violation = false;
  bool failed = false;
  std::string note;
  double solve_seconds = 0.0;
  double sampling_seconds = 0.0;
};

struct RunReport {
  std::vector<IntervalRow> rows;
  // Aggregates over rows (failures excluded from the means); recompute()
  // derives them from the rows exactly.
  int evaluated = 0;
  int failures = 0;
  int violations = 0;
  double violation_rate = 0.0;
  double mean_objective = 0.0;
  double mean_realized_cost = 0.0;
  double mean_solve_seconds = 0.0;
  double mean_sampling_seconds = 0.0;
  double mean_sample_size = 0.0;

  void recompute();
};

/// Rolling-horizon simulation: for each interval, fit the correlation
/// profile on the lookback window (strictly before the interval), sample by
/// the configured space, dispatch by the configured method, then flag
/// violations against the held-out realized error. Per-interval failures
/// are recorded, not fatal. Throws std::logic_error if a sampled scenario
/// ever reaches into the interval's present or future.
RunReport simulate_rolling(const GridCase& grid, const ScenarioStore& store,
                           const SimulationConfig& config);

/// Fraction of held-out error realizations (MW per farm) that violate the
/// solution beyond `tol`.
double violation_test(const ScenarioProblem& problem,
                      const DispatchSolution& solution,
                      const std::vector<Eigen::VectorXd>& heldout,
                      double tol = 1e-6);

enum class ReportFormat { kCsv, kJson, kLongCsv };

/// Renders the report: per-interval CSV, JSON (rows + aggregates), or the
/// plot-ready long format (timestamp,series,value).
void emit_report(const RunReport& report, ReportFormat format,
                 const std::string& path);

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);

}  // namespace ccd
