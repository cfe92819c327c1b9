#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccdispatch/certificates.hpp"
#include "ccdispatch/scenario_problem.hpp"
#include "ccdispatch/scenario_store.hpp"
#include "ccdispatch/support.hpp"

namespace ccd {

/// Inputs fixed for one dispatch decision.
struct DispatchSetup {
  const GridCase* grid = nullptr;
  const PtdfMatrix* ptdf = nullptr;
  DispatchInterval interval;
  SpBuildOptions build{};
  SupportSearchOptions support{};
};

struct TraceRow {
  int iteration = 0;            // j
  std::int64_t sample_size = 0; // N_j, or remaining input size when discarding
  int complexity = 0;           // h_j from the dual-based search
  double objective = 0.0;
  double epsilon = 0.0;         // posterior risk recorded at this step
};

struct RiskTuningTrace {
  std::vector<TraceRow> rows;
  ScenarioProblem problem;       // terminal scenario problem
  DispatchSolution solution;     // terminal solution
  Certificate certificate;
  std::vector<int> record_indices;  // store indices backing the terminal SP
  bool duplicate_warning = false;   // duplicate scenarios detected (degeneracy)
  double solve_seconds = 0.0;
  double sampling_seconds = 0.0;
};

/// Raised when the sampler cannot reach the worst-case sample size; carries
/// the best certificate achievable with what remains.
struct ResetRiskError : std::runtime_error {
  ResetRiskError(const RiskBudget& requested, double achievable_epsilon,
                 std::size_t available)
      : std::runtime_error(
            "insufficient scenarios: reset risk and confidence level "
            "(achievable epsilon " +
            std::to_string(achievable_epsilon) + " at beta " +
            std::to_string(requested.beta) + " with " +
            std::to_string(available) + " scenarios)"),
        requested(requested),
        achievable_epsilon(achievable_epsilon),
        available(available) {}
  RiskBudget requested;
  double achievable_epsilon;
  std::size_t available;
};

/// Raised when the store runs dry mid-loop; carries the partial trace.
struct IncompleteTraceError : std::runtime_error {
  IncompleteTraceError(std::string what, RiskTuningTrace partial)
      : std::runtime_error(std::move(what)), partial(std::move(partial)) {}
  RiskTuningTrace partial;
};

struct AprioriResult {
  ScenarioProblem problem;
  SpResult sp;
  Certificate certificate;
  std::vector<int> record_indices;
  double sampling_seconds = 0.0;
};

/// Worst-case a-priori dispatch: N = sample_size(n, budget) with
/// n = 2 n_g - 2, scenarios taken from the sampler (nearest-environment by
/// default). Throws ResetRiskError when the sampler is too small.
AprioriResult apriori_dispatch(const DispatchSetup& setup,
                               const ScenarioStore& store,
                               ScenarioSampler& sampler,
                               const RiskBudget& budget);

/// Incremental scenario optimization: assume complexity j, draw up to
/// N_j = sample_size(j, budget) scenarios without replacement, solve,
/// measure h_j by the dual-based search, halt once h_j <= j. The terminal
/// certificate satisfies posterior epsilon <= budget.epsilon.
RiskTuningTrace incremental_dispatch(const DispatchSetup& setup,
                                     const ScenarioStore& store,
                                     ScenarioSampler& sampler,
                                     const RiskBudget& budget);

/// Decremental baseline: start from the worst-case size N0, then discard
/// the largest-dual support scenario one at a time while the charged
/// certificate posterior_risk(h + discards, N0, beta) stays within budget.
/// A discard that would break the budget is rolled back.
RiskTuningTrace sample_discard_baseline(const DispatchSetup& setup,
                                        const ScenarioStore& store,
                                        ScenarioSampler& sampler,
                                        const RiskBudget& budget);

/// Builds the n_w x N scenario matrix (MW per farm) for the given records.
Eigen::MatrixXd scenario_matrix(const GridCase& grid,
                                const ScenarioStore& store,
                                const std::vector<int>& record_indices);

/// Trace dump: header j,N_j,h_j,objective,epsilon_j.
void write_trace_csv(const std::string& path, const RiskTuningTrace& trace);

}  // namespace ccd
