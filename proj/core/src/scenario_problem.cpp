#include "ccdispatch/scenario_problem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace ccd {

DispatchInterval nominal_interval(const GridCase& grid) {
  DispatchInterval iv;
  iv.demand.resize(grid.loads.size());
  for (std::size_t i = 0; i < grid.loads.size(); ++i)
    iv.demand(i) = grid.loads[i].demand;
  iv.wind_forecast.resize(grid.wind_farms.size());
  for (std::size_t i = 0; i < grid.wind_farms.size(); ++i)
    iv.wind_forecast(i) = grid.wind_farms[i].forecast;
  return iv;
}

Eigen::VectorXd farm_error_mw(const GridCase& grid,
                              const std::vector<std::string>& regions,
                              const Eigen::VectorXd& per_unit) {
  if (per_unit.size() != int(regions.size()))
    throw std::invalid_argument("farm_error_mw: region/error size mismatch");
  Eigen::VectorXd out(grid.wind_farms.size());
  for (std::size_t f = 0; f < grid.wind_farms.size(); ++f) {
    const WindFarm& farm = grid.wind_farms[f];
    auto it = std::find(regions.begin(), regions.end(), farm.region);
    if (it == regions.end())
      throw std::invalid_argument("farm_error_mw: unknown region \"" +
                                  farm.region + "\"");
    out(f) = farm.capacity * per_unit(it - regions.begin());
  }
  return out;
}

ScenarioProblem build_sp(const GridCase& grid, const PtdfMatrix& ptdf,
                         const DispatchInterval& interval,
                         const Eigen::MatrixXd& scenarios_mw,
                         const SpBuildOptions& options) {
  const int ng = int(grid.generators.size());
  const int nw = int(grid.wind_farms.size());
  const int nf = int(grid.lines.size());
  if (interval.demand.size() != int(grid.loads.size()))
    throw std::invalid_argument("build_sp: demand dimension mismatch");
  if (interval.wind_forecast.size() != nw)
    throw std::invalid_argument("build_sp: forecast dimension mismatch");
  if (scenarios_mw.size() > 0 && scenarios_mw.rows() != nw)
    throw std::invalid_argument("build_sp: scenario dimension mismatch");
  if (options.ramp_anchor && !interval.prior_g)
    throw std::invalid_argument("build_sp: ramp_anchor requires prior_g");

  ScenarioProblem sp;
  sp.opts_ = options;
  sp.cost_.resize(ng);
  sp.gmin_.resize(ng);
  sp.gmax_.resize(ng);
  sp.ramp_up_.resize(ng);
  sp.ramp_dn_.resize(ng);
  for (int i = 0; i < ng; ++i) {
    const Generator& gen = grid.generators[i];
    sp.cost_(i) = gen.cost;
    sp.gmin_(i) = gen.g_min;
    sp.gmax_(i) = gen.g_max;
    sp.ramp_up_(i) = gen.ramp_up;
    sp.ramp_dn_(i) = gen.ramp_down;
  }
  sp.fcap_.resize(nf);
  for (int l = 0; l < nf; ++l) sp.fcap_(l) = grid.lines[l].capacity;
  sp.Hg_ = ptdf.H_g;
  sp.Hw_ = ptdf.H_w;
  sp.wind_forecast_ = interval.wind_forecast;
  sp.wind_cap_.resize(nw);
  for (int w = 0; w < nw; ++w) sp.wind_cap_(w) = grid.wind_farms[w].capacity;
  for (int w = 0; w < nw; ++w)
    if (sp.wind_forecast_(w) < 0.0 || sp.wind_forecast_(w) > sp.wind_cap_(w))
      throw std::invalid_argument("build_sp: forecast outside [0, capacity]");

  sp.base_flow_ = -ptdf.H_d * interval.demand + ptdf.H_w * sp.wind_forecast_;
  sp.net_demand_ = interval.demand.sum() - sp.wind_forecast_.sum();

  if (options.ramp_anchor) {
    sp.anchor_lo_ = *interval.prior_g + sp.ramp_dn_;
    sp.anchor_hi_ = *interval.prior_g + sp.ramp_up_;
  }

  const int n_scen = scenarios_mw.size() > 0 ? int(scenarios_mw.cols()) : 0;
  sp.werr_.resize(nw, n_scen);
  for (int i = 0; i < n_scen; ++i) {
    // Clamp so realized wind stays physical.
    for (int w = 0; w < nw; ++w) {
      const double realized = std::clamp(
          sp.wind_forecast_(w) + scenarios_mw(w, i), 0.0, sp.wind_cap_(w));
      sp.werr_(w, i) = realized - sp.wind_forecast_(w);
    }
  }
  sp.t_ = sp.werr_.colwise().sum();
  sp.flow_off_ = ptdf.H_w * sp.werr_;
  return sp;
}

int ScenarioProblem::num_base_rows() const {
  int base = 2 + 2 * num_generators();
  if (opts_.nonneg_eta) base += num_generators();
  if (anchor_lo_) base += 2 * num_generators();
  return base;
}

std::int64_t ScenarioProblem::num_rows() const {
  return std::int64_t(num_base_rows()) +
         std::int64_t(num_scenarios()) * rows_per_scenario();
}

ScenarioProblem ScenarioProblem::subset(const std::vector<int>& keep) const {
  ScenarioProblem sp(*this);
  const int n = int(keep.size());
  sp.werr_.resize(werr_.rows(), n);
  sp.flow_off_.resize(flow_off_.rows(), n);
  sp.t_.resize(n);
  for (int i = 0; i < n; ++i) {
    const int k = keep[i];
    if (k < 0 || k >= num_scenarios())
      throw std::out_of_range("ScenarioProblem::subset: bad index");
    sp.werr_.col(i) = werr_.col(k);
    sp.flow_off_.col(i) = flow_off_.col(k);
    sp.t_(i) = t_(k);
  }
  return sp;
}

double DispatchSolution::dual_block_norm(int scenario) const {
  const Eigen::VectorXd& d = scenario_duals.at(scenario);
  return d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
}

bool DispatchSolution::dual_block_nonzero(int scenario) const {
  return dual_block_norm(scenario) > 1e-8 * (1.0 + std::abs(objective));
}

// Scenario-block row offsets follow the dual layout: [flow_hi(nf),
// flow_lo(nf), box_hi(ng), box_lo(ng), ramp_hi(ng), ramp_lo(ng)].
class SpSolver {
 public:
  SpSolver(const ScenarioProblem& sp, const SpSolveOptions& opts)
      : sp_(sp), opts_(opts), nf_(sp.num_lines()), ng_(sp.num_generators()) {}

  SpResult run(const std::vector<ScenRow>& warm);

 private:
  struct Row {
    Eigen::VectorXd a;
    double b;
    bool eq;
    int scenario;  // -1 for base rows
    int offset;    // offset within the scenario block
  };

  void base_rows(std::vector<Row>& rows) const;
  Row scen_row(int scen, int offset) const;
  // Appends all violated scenario rows at (g, eta) above tol.
  void scan_violations(const Eigen::VectorXd& g, const Eigen::VectorXd& eta,
                       std::vector<std::pair<double, ScenRow>>& out) const;

  const ScenarioProblem& sp_;
  SpSolveOptions opts_;
  int nf_, ng_;
};

void SpSolver::base_rows(std::vector<Row>& rows) const {
  const int n = 2 * ng_;
  auto unit = [&](int j, double v) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    a(j) = v;
    return a;
  };

  Row balance;
  balance.a = Eigen::VectorXd::Zero(n);
  balance.a.head(ng_).setOnes();
  balance.b = sp_.net_demand_;
  balance.eq = true;
  balance.scenario = -1;
  balance.offset = 0;
  rows.push_back(balance);

  Row eta_sum;
  eta_sum.a = Eigen::VectorXd::Zero(n);
  eta_sum.a.tail(ng_).setOnes();
  eta_sum.b = 1.0;
  eta_sum.eq = true;
  eta_sum.scenario = -1;
  eta_sum.offset = 1;
  rows.push_back(eta_sum);

  for (int i = 0; i < ng_; ++i)
    rows.push_back({unit(i, 1.0), sp_.gmax_(i), false, -1, 0});
  for (int i = 0; i < ng_; ++i)
    rows.push_back({unit(i, -1.0), -sp_.gmin_(i), false, -1, 0});
  if (sp_.opts_.nonneg_eta)
    for (int i = 0; i < ng_; ++i)
      rows.push_back({unit(ng_ + i, -1.0), 0.0, false, -1, 0});
  if (sp_.anchor_lo_) {
    for (int i = 0; i < ng_; ++i)
      rows.push_back({unit(i, 1.0), (*sp_.anchor_hi_)(i), false, -1, 0});
    for (int i = 0; i < ng_; ++i)
      rows.push_back({unit(i, -1.0), -(*sp_.anchor_lo_)(i), false, -1, 0});
  }
}

SpSolver::Row SpSolver::scen_row(int scen, int offset) const {
  const int n = 2 * ng_;
  const double t = sp_.t_(scen);
  Row row;
  row.scenario = scen;
  row.offset = offset;
  row.eq = false;
  row.a = Eigen::VectorXd::Zero(n);

  if (offset < 2 * nf_) {
    // Flow rows: f = Hg g - t Hg eta + base + off; f <= fcap / -f <= fcap.
    const bool hi = offset < nf_;
    const int l = hi ? offset : offset - nf_;
    const double s = hi ? 1.0 : -1.0;
    row.a.head(ng_) = s * sp_.Hg_.row(l).transpose();
    row.a.tail(ng_) = -s * t * sp_.Hg_.row(l).transpose();
    row.b = sp_.fcap_(l) - s * (sp_.base_flow_(l) + sp_.flow_off_(l, scen));
    return row;
  }
  int o = offset - 2 * nf_;
  if (o < 2 * ng_) {
    // Adjusted output box: g - t eta within [gmin, gmax].
    const bool hi = o < ng_;
    const int i = hi ? o : o - ng_;
    const double s = hi ? 1.0 : -1.0;
    row.a(i) = s;
    row.a(ng_ + i) = -s * t;
    row.b = hi ? sp_.gmax_(i) : -sp_.gmin_(i);
    return row;
  }
  o -= 2 * ng_;
  // Ramp rows: -t eta within [ramp_dn, ramp_up] per generator.
  const bool hi = o < ng_;
  const int i = hi ? o : o - ng_;
  const double s = hi ? 1.0 : -1.0;
  row.a(ng_ + i) = -s * t;
  row.b = hi ? sp_.ramp_up_(i) : -sp_.ramp_dn_(i);
  return row;
}

void SpSolver::scan_violations(
    const Eigen::VectorXd& g, const Eigen::VectorXd& eta,
    std::vector<std::pair<double, ScenRow>>& out) const {
  const int n_scen = sp_.num_scenarios();
  if (n_scen == 0) return;

  const Eigen::VectorXd flow_g = sp_.Hg_ * g + sp_.base_flow_;
  const Eigen::VectorXd flow_eta = sp_.Hg_ * eta;
  const double tol = opts_.cg_tol;

  Eigen::VectorXd flow(nf_), adj(ng_);
  for (int i = 0; i < n_scen; ++i) {
    const double t = sp_.t_(i);
    flow = flow_g - t * flow_eta + sp_.flow_off_.col(i);
    adj = g - t * eta;
    for (int l = 0; l < nf_; ++l) {
      const double hi = flow(l) - sp_.fcap_(l);
      if (hi > tol) out.push_back({hi, {i, l}});
      const double lo = -flow(l) - sp_.fcap_(l);
      if (lo > tol) out.push_back({lo, {i, nf_ + l}});
    }
    for (int k = 0; k < ng_; ++k) {
      const double hi = adj(k) - sp_.gmax_(k);
      if (hi > tol) out.push_back({hi, {i, 2 * nf_ + k}});
      const double lo = sp_.gmin_(k) - adj(k);
      if (lo > tol) out.push_back({lo, {i, 2 * nf_ + ng_ + k}});
      const double rhi = -t * eta(k) - sp_.ramp_up_(k);
      if (rhi > tol) out.push_back({rhi, {i, 2 * nf_ + 2 * ng_ + k}});
      const double rlo = sp_.ramp_dn_(k) - (-t * eta(k));
      if (rlo > tol) out.push_back({rlo, {i, 2 * nf_ + 3 * ng_ + k}});
    }
  }
}

SpResult SpSolver::run(const std::vector<ScenRow>& warm) {
  const auto t0 = std::chrono::steady_clock::now();
  SpResult res;
  res.report.rows = sp_.num_rows();
  res.report.columns = 2 * ng_;

  std::vector<Row> rows;
  base_rows(rows);
  const int n_base = int(rows.size());

  std::set<std::pair<int, int>> in_set;
  for (const ScenRow& w : warm) {
    if (w.scenario < 0 || w.scenario >= sp_.num_scenarios()) continue;
    if (w.offset < 0 || w.offset >= sp_.rows_per_scenario()) continue;
    if (in_set.insert({w.scenario, w.offset}).second)
      rows.push_back(scen_row(w.scenario, w.offset));
  }

  DispatchSolution& sol = res.solution;
  Eigen::VectorXd c(2 * ng_);
  c.head(ng_) = sp_.cost_;
  c.tail(ng_).setZero();

  LpSolution lp;
  for (int pass = 0; pass < opts_.max_cg_passes; ++pass) {
    ++res.report.cg_passes;
    const int m = int(rows.size());
    Eigen::MatrixXd A(m, 2 * ng_);
    Eigen::VectorXd b(m);
    std::vector<bool> eq(m);
    for (int r = 0; r < m; ++r) {
      A.row(r) = rows[r].a.transpose();
      b(r) = rows[r].b;
      eq[r] = rows[r].eq;
    }
    lp = solve_lp(c, A, b, eq);
    res.report.lp_iterations += lp.iterations;
    res.report.working_rows = m;

    if (lp.status == LpStatus::kInfeasible) {
      sol.status = LpStatus::kInfeasible;
      std::set<int> scen;
      for (const Row& r : rows)
        if (r.scenario >= 0) scen.insert(r.scenario);
      sol.infeasibility_hint.assign(scen.begin(), scen.end());
      break;
    }
    if (lp.status != LpStatus::kOptimal) {
      sol.status = lp.status;
      res.report.note = std::string("inner LP: ") + to_string(lp.status) + " " + lp.note;
      break;
    }

    const Eigen::VectorXd g = lp.x.head(ng_);
    const Eigen::VectorXd eta = lp.x.tail(ng_);
    std::vector<std::pair<double, ScenRow>> violated;
    scan_violations(g, eta, violated);

    // Rows already in the working set may sit at residuals between cg_tol
    // and the certification tolerance; that is termination, not progress.
    bool all_within_feas = true;
    bool any_new = false;
    for (const auto& [resid, ref] : violated) {
      if (resid > opts_.feas_tol) all_within_feas = false;
      if (!in_set.count({ref.scenario, ref.offset})) any_new = true;
    }
    if (!violated.empty() && !any_new && all_within_feas) violated.clear();

    if (violated.empty()) {
      sol.status = LpStatus::kOptimal;
      sol.g = g;
      sol.eta = eta;
      sol.objective = lp.objective;
      sol.scenario_duals.assign(sp_.num_scenarios(),
                                Eigen::VectorXd::Zero(sp_.rows_per_scenario()));
      for (int r = n_base; r < int(rows.size()); ++r)
        sol.scenario_duals[rows[r].scenario](rows[r].offset) = lp.duals(r);
      res.active_set.clear();
      for (int r = n_base; r < int(rows.size()); ++r)
        res.active_set.push_back({rows[r].scenario, rows[r].offset});
      break;
    }

    std::sort(violated.begin(), violated.end(),
              [](const auto& x, const auto& y) {
                if (x.first != y.first) return x.first > y.first;
                if (x.second.scenario != y.second.scenario)
                  return x.second.scenario < y.second.scenario;
                return x.second.offset < y.second.offset;
              });
    int added = 0;
    for (const auto& [resid, ref] : violated) {
      if (added >= opts_.top_k_per_pass) break;
      if (in_set.insert({ref.scenario, ref.offset}).second) {
        rows.push_back(scen_row(ref.scenario, ref.offset));
        ++added;
      }
    }
    if (added == 0) {
      // Violations beyond feas_tol on rows already present: the inner
      // solver is not honoring its own working set.
      sol.status = LpStatus::kNumericalFailure;
      res.report.note = "working-set rows violated beyond feas_tol";
      break;
    }
    if (pass + 1 == opts_.max_cg_passes) {
      sol.status = LpStatus::kNumericalFailure;
      res.report.note = "constraint-generation pass limit";
    }
  }

  res.report.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

SpResult solve_sp(const ScenarioProblem& problem, const SpSolveOptions& options,
                  const std::vector<ScenRow>& warm_start) {
  SpSolver solver(problem, options);
  return solver.run(warm_start);
}

FeasibilityEvaluator::FeasibilityEvaluator(const ScenarioProblem& sp,
                                           const DispatchSolution& sol) {
  if (sol.status != LpStatus::kOptimal)
    throw std::invalid_argument("FeasibilityEvaluator: solution not optimal");
  cost_ = sp.cost_;
  gmin_ = sp.gmin_;
  gmax_ = sp.gmax_;
  ramp_up_ = sp.ramp_up_;
  ramp_dn_ = sp.ramp_dn_;
  fcap_ = sp.fcap_;
  wind_forecast_ = sp.wind_forecast_;
  wind_cap_ = sp.wind_cap_;
  g_ = sol.g;
  eta_ = sol.eta;
  flow_g_ = sp.Hg_ * sol.g + sp.base_flow_;
  flow_eta_ = sp.Hg_ * sol.eta;
  cg_ = sp.cost_.dot(sol.g);
  Hw_ = sp.Hw_;
}

double FeasibilityEvaluator::worst_residual(
    const Eigen::VectorXd& werr_raw) const {
  const int nw = int(wind_forecast_.size());
  Eigen::VectorXd werr(nw);
  for (int w = 0; w < nw; ++w) {
    const double realized =
        std::clamp(wind_forecast_(w) + werr_raw(w), 0.0, wind_cap_(w));
    werr(w) = realized - wind_forecast_(w);
  }
  const double t = werr.sum();
  double worst = -std::numeric_limits<double>::infinity();

  const Eigen::VectorXd flow = flow_g_ - t * flow_eta_ + Hw_ * werr;
  worst = std::max(worst, (flow.cwiseAbs() - fcap_).maxCoeff());

  const Eigen::VectorXd adj = g_ - t * eta_;
  worst = std::max(worst, (adj - gmax_).maxCoeff());
  worst = std::max(worst, (gmin_ - adj).maxCoeff());

  const Eigen::VectorXd ramp = -t * eta_;
  worst = std::max(worst, (ramp - ramp_up_).maxCoeff());
  worst = std::max(worst, (ramp_dn_ - ramp).maxCoeff());
  return worst;
}

double FeasibilityEvaluator::realized_cost(const Eigen::VectorXd& werr_raw,
                                           double wind_price_per_mwh) const {
  const int nw = int(wind_forecast_.size());
  double realized_wind = 0.0, t = 0.0;
  for (int w = 0; w < nw; ++w) {
    const double realized =
        std::clamp(wind_forecast_(w) + werr_raw(w), 0.0, wind_cap_(w));
    realized_wind += realized;
    t += realized - wind_forecast_(w);
  }
  return cg_ - t * cost_.dot(eta_) + wind_price_per_mwh * realized_wind;
}

double check_feasibility(const ScenarioProblem& problem,
                         const DispatchSolution& solution,
                         const Eigen::VectorXd& werr_raw) {
  return FeasibilityEvaluator(problem, solution).worst_residual(werr_raw);
}

double realized_cost(const ScenarioProblem& problem,
                     const DispatchSolution& solution,
                     const Eigen::VectorXd& werr_raw,
                     double wind_price_per_mwh) {
  return FeasibilityEvaluator(problem, solution)
      .realized_cost(werr_raw, wind_price_per_mwh);
}

}  // namespace ccd
