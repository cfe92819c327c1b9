#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccdispatch/grid.hpp"
#include "ccdispatch/lp.hpp"
#include "ccdispatch/ptdf.hpp"

namespace ccd {

/// One dispatch interval: demand per load, wind forecast per farm (MW), and
/// optionally the previous dispatch for ramp anchoring.
struct DispatchInterval {
  Eigen::VectorXd demand;
  Eigen::VectorXd wind_forecast;
  std::optional<Eigen::VectorXd> prior_g;
};

/// Returns the interval with demand taken from the case loads and forecast
/// from the case wind farms.
DispatchInterval nominal_interval(const GridCase& grid);

struct SpBuildOptions {
  bool nonneg_eta = false;   // add eta >= 0 (conventional participation factors)
  bool ramp_anchor = false;  // add g within [prior_g + R_d, prior_g + R_u]
};

/// Scenario dispatch problem over decision variables (g, eta):
///   min c'g
///   s.t. 1'g = 1'd - 1'w_hat,  1'eta = 1,  g_min <= g <= g_max,
///   and per scenario i the flow / adjusted-output / ramp inequalities with
///   flows f_i = H_g (g - t_i eta) - H_d d + H_w (w_hat + werr_i), where
///   werr_i is the scenario error clamped so realized wind stays within
///   [0, capacity] per farm and t_i = 1'werr_i.
class ScenarioProblem {
 public:
  ScenarioProblem() = default;

  int num_scenarios() const { return int(t_.size()); }
  int num_generators() const { return int(cost_.size()); }
  int num_lines() const { return int(fcap_.size()); }
  /// Rows of the logical model: equalities + nominal box + per-scenario
  /// blocks (+ optional eta-sign / ramp-anchor rows).
  std::int64_t num_rows() const;
  int rows_per_scenario() const { return 2 * num_lines() + 4 * num_generators(); }
  int num_base_rows() const;

  /// Effective (clamped) scenario errors in MW per farm, one column each.
  const Eigen::MatrixXd& scenario_errors() const { return werr_; }
  const Eigen::VectorXd& scenario_totals() const { return t_; }
  const Eigen::VectorXd& generator_cost() const { return cost_; }
  const SpBuildOptions& options() const { return opts_; }
  const Eigen::VectorXd& wind_forecast() const { return wind_forecast_; }

  /// Problem restricted to the given scenario indices (order preserved).
  ScenarioProblem subset(const std::vector<int>& keep) const;

  friend ScenarioProblem build_sp(const GridCase&, const PtdfMatrix&,
                                  const DispatchInterval&,
                                  const Eigen::MatrixXd&,
                                  const SpBuildOptions&);
  friend class SpSolver;
  friend class FeasibilityEvaluator;

 private:
  SpBuildOptions opts_;
  Eigen::VectorXd cost_, gmin_, gmax_, ramp_up_, ramp_dn_;  // n_g
  Eigen::VectorXd fcap_;                                    // n_f
  Eigen::MatrixXd Hg_;                                      // n_f x n_g
  Eigen::MatrixXd Hw_;                                      // n_f x n_w
  Eigen::VectorXd base_flow_;      // -H_d d + H_w w_hat
  Eigen::VectorXd wind_forecast_;  // n_w, MW
  Eigen::VectorXd wind_cap_;       // n_w, MW
  double net_demand_ = 0.0;        // 1'd - 1'w_hat
  std::optional<Eigen::VectorXd> anchor_lo_, anchor_hi_;
  Eigen::MatrixXd werr_;      // n_w x N, clamped MW errors
  Eigen::VectorXd t_;         // N, column sums of werr_
  Eigen::MatrixXd flow_off_;  // n_f x N, H_w * werr_
};

/// Builds the scenario problem. `scenarios_mw` has one column per scenario
/// (n_w x N); raw errors are clamped at build time. N = 0 gives the
/// deterministic DC-OPF with no scenario blocks.
ScenarioProblem build_sp(const GridCase& grid, const PtdfMatrix& ptdf,
                         const DispatchInterval& interval,
                         const Eigen::MatrixXd& scenarios_mw,
                         const SpBuildOptions& options = {});

struct DispatchSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  Eigen::VectorXd g;
  Eigen::VectorXd eta;
  double objective = 0.0;
  /// Multiplier block per scenario for its inequality rows, laid out
  /// [flow_hi, flow_lo, box_hi, box_lo, ramp_hi, ramp_lo].
  std::vector<Eigen::VectorXd> scenario_duals;
  /// Scale-aware support-candidate test: ||mu_i||_inf > 1e-8 (1 + |obj|).
  double dual_block_norm(int scenario) const;
  bool dual_block_nonzero(int scenario) const;
  /// Scenario indices contributing rows when infeasibility was detected
  /// (best-effort hint, empty when optimal).
  std::vector<int> infeasibility_hint;
};

struct SolverReport {
  std::int64_t rows = 0;  // logical model rows
  int columns = 0;
  int lp_iterations = 0;
  int cg_passes = 0;
  int working_rows = 0;
  double solve_seconds = 0.0;
  std::string note;  // failure diagnostics, empty when healthy
};

struct SpSolveOptions {
  double feas_tol = 1e-6;    // post-solve feasibility certification, MW
  double cg_tol = 1e-7;      // violation threshold for adding rows, MW
  int max_cg_passes = 400;
  int top_k_per_pass = 48;
};

/// A working-set row: scenario index plus offset within its block
/// (offsets follow the dual block layout). Used for warm starts.
struct ScenRow {
  int scenario = 0;
  int offset = 0;
};

struct SpResult {
  DispatchSolution solution;
  SolverReport report;
  std::vector<ScenRow> active_set;  // working set at termination
};

/// Solves the scenario problem by constraint generation over the scenario
/// rows (base rows always present), returning primal, per-block duals and
/// status. Deterministic for a fixed problem and options.
SpResult solve_sp(const ScenarioProblem& problem,
                  const SpSolveOptions& options = {},
                  const std::vector<ScenRow>& warm_start = {});

/// Evaluates feasibility and realized cost of a fixed solution at arbitrary
/// wind-error realizations; precomputes everything solution-dependent.
class FeasibilityEvaluator {
 public:
  FeasibilityEvaluator(const ScenarioProblem& problem,
                       const DispatchSolution& solution);

  /// Worst signed constraint residual (MW) over the scenario-type rows at
  /// the given raw error (MW per farm, clamped like the builder does).
  /// <= 0 means feasible.
  double worst_residual(const Eigen::VectorXd& werr_raw) const;

  /// c'(g - t eta) + wind_price * realized wind.
  double realized_cost(const Eigen::VectorXd& werr_raw,
                       double wind_price_per_mwh) const;

 private:
  Eigen::VectorXd cost_, gmin_, gmax_, ramp_up_, ramp_dn_;
  Eigen::VectorXd fcap_, wind_forecast_, wind_cap_;
  Eigen::MatrixXd Hw_;
  Eigen::VectorXd g_, eta_;
  Eigen::VectorXd flow_g_;   // H_g g + base flow
  Eigen::VectorXd flow_eta_; // H_g eta
  double cg_ = 0.0;          // c'g
};

/// Max signed residual of the per-scenario constraint system at w. The
/// clamping rule matches build_sp.
double check_feasibility(const ScenarioProblem& problem,
                         const DispatchSolution& solution,
                         const Eigen::VectorXd& werr_raw);

/// Conventional-generation cost after the affine response plus the wind
/// energy payment at `wind_price_per_mwh` (default 3 $/MWh).
double realized_cost(const ScenarioProblem& problem,
                     const DispatchSolution& solution,
                     const Eigen::VectorXd& werr_raw,
                     double wind_price_per_mwh = 3.0);

/// Maps per-region per-unit errors onto farms: farm error (MW) = capacity *
/// error of its region. `regions` gives the column order of `per_unit`.
Eigen::VectorXd farm_error_mw(const GridCase& grid,
                              const std::vector<std::string>& regions,
                              const Eigen::VectorXd& per_unit);

}  // namespace ccd
