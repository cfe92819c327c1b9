#include "ccdispatch/risk_tuning.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstdio>
#include <fstream>

namespace ccd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_setup(const DispatchSetup& setup) {
  if (!setup.grid || !setup.ptdf)
    throw std::invalid_argument("dispatch setup: grid/ptdf not set");
}

double achievable_epsilon(int h, std::size_t available, double beta) {
  if (available < std::size_t(std::max(h, 1))) return 1.0;
  return posterior_risk(h, std::int64_t(available), beta);
}

bool has_duplicate_columns(const Eigen::MatrixXd& m) {
  std::vector<int> order(m.cols());
  for (int i = 0; i < m.cols(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int r = 0; r < m.rows(); ++r) {
      if (m(r, a) < m(r, b)) return true;
      if (m(r, a) > m(r, b)) return false;
    }
    return false;
  });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (m.col(order[i]) == m.col(order[i - 1])) return true;
  return false;
}

}  // namespace

Eigen::MatrixXd scenario_matrix(const GridCase& grid,
                                const ScenarioStore& store,
                                const std::vector<int>& record_indices) {
  Eigen::MatrixXd out(grid.wind_farms.size(), record_indices.size());
  for (std::size_t i = 0; i < record_indices.size(); ++i)
    out.col(i) = farm_error_mw(grid, store.regions(),
                               store.record(record_indices[i]).error);
  return out;
}

AprioriResult apriori_dispatch(const DispatchSetup& setup,
                               const ScenarioStore& store,
                               ScenarioSampler& sampler,
                               const RiskBudget& budget) {
  check_setup(setup);
  const int n = 2 * int(setup.grid->generators.size()) - 2;
  const std::int64_t need = sample_size(n, budget);
  if (std::int64_t(sampler.remaining()) < need)
    throw ResetRiskError(budget,
                         achievable_epsilon(n, sampler.remaining(), budget.beta),
                         sampler.remaining());

  AprioriResult res;
  const auto t0 = Clock::now();
  res.record_indices = sampler.take(int(need));
  res.sampling_seconds = seconds_since(t0);

  res.problem = build_sp(*setup.grid, *setup.ptdf, setup.interval,
                         scenario_matrix(*setup.grid, store, res.record_indices),
                         setup.build);
  res.sp = solve_sp(res.problem);
  res.certificate = make_certificate(n, need, budget.beta);
  return res;
}

RiskTuningTrace incremental_dispatch(const DispatchSetup& setup,
                                     const ScenarioStore& store,
                                     ScenarioSampler& sampler,
                                     const RiskBudget& budget) {
  check_setup(setup);
  const int n = 2 * int(setup.grid->generators.size()) - 2;

  RiskTuningTrace trace;
  std::vector<int> drawn;
  std::int64_t n_prev = 0;
  SpResult solved;

  for (int j = 1; j <= n; ++j) {
    const std::int64_t n_j = sample_size(j, budget);
    const auto ts = Clock::now();
    try {
      const std::vector<int> fresh = sampler.take(int(n_j - n_prev));
      drawn.insert(drawn.end(), fresh.begin(), fresh.end());
    } catch (const StoreExhausted& e) {
      trace.sampling_seconds += seconds_since(ts);
      throw IncompleteTraceError(
          std::string("incremental_dispatch: ") + e.what(), std::move(trace));
    }
    trace.sampling_seconds += seconds_since(ts);
    n_prev = n_j;

    const ScenarioProblem sp =
        build_sp(*setup.grid, *setup.ptdf, setup.interval,
                 scenario_matrix(*setup.grid, store, drawn), setup.build);
    // Nested scenario sets: warm-start from the previous working set
    // (scenario positions are stable under the append-only top-up).
    solved = solve_sp(sp, {}, solved.active_set);
    trace.solve_seconds += solved.report.solve_seconds;
    if (solved.solution.status != LpStatus::kOptimal)
      throw IncompleteTraceError(
          "incremental_dispatch: solve failed at iteration " +
              std::to_string(j) + " (" +
              to_string(solved.solution.status) + ")",
          std::move(trace));

    const std::vector<int> support = support_dual(sp, solved, setup.support);
    const int h_j = int(support.size());
    assert(h_j <= n);
    const Certificate cert = make_certificate(h_j, n_j, budget.beta);
    trace.rows.push_back(
        {j, n_j, h_j, solved.solution.objective, cert.posterior_epsilon});

    if (h_j <= j) {
      trace.problem = sp;
      trace.solution = solved.solution;
      trace.certificate = cert;
      trace.record_indices = drawn;
      trace.duplicate_warning = has_duplicate_columns(sp.scenario_errors());
      return trace;
    }
  }
  // Theorem 2: h_j <= n = j at the last iteration, so the loop always
  // returns; reaching here means the support search overcounted.
  assert(false && "incremental_dispatch: exceeded the Helly bound");
  throw std::logic_error("incremental_dispatch: exceeded the Helly bound");
}

RiskTuningTrace sample_discard_baseline(const DispatchSetup& setup,
                                        const ScenarioStore& store,
                                        ScenarioSampler& sampler,
                                        const RiskBudget& budget) {
  check_setup(setup);
  const int n = 2 * int(setup.grid->generators.size()) - 2;
  const std::int64_t n0 = sample_size(n, budget);
  if (std::int64_t(sampler.remaining()) < n0)
    throw ResetRiskError(budget,
                         achievable_epsilon(n, sampler.remaining(), budget.beta),
                         sampler.remaining());

  RiskTuningTrace trace;
  const auto ts = Clock::now();
  std::vector<int> current = sampler.take(int(n0));
  trace.sampling_seconds = seconds_since(ts);

  ScenarioProblem sp =
      build_sp(*setup.grid, *setup.ptdf, setup.interval,
               scenario_matrix(*setup.grid, store, current), setup.build);
  SpResult solved = solve_sp(sp);
  trace.solve_seconds += solved.report.solve_seconds;
  if (solved.solution.status != LpStatus::kOptimal)
    throw IncompleteTraceError(
        std::string("sample_discard_baseline: initial solve failed (") +
            to_string(solved.solution.status) + ")",
        std::move(trace));

  std::vector<int> support = support_dual(sp, solved, setup.support);
  int discards = 0;
  Certificate cert =
      make_certificate(int(support.size()) + discards, n0, budget.beta);
  trace.rows.push_back({1, n0, int(support.size()), solved.solution.objective,
                        cert.posterior_epsilon});
  trace.duplicate_warning = has_duplicate_columns(sp.scenario_errors());

  while (!support.empty()) {
    // Greedy: drop the support scenario with the largest dual block.
    int victim = support.front();
    for (int s : support)
      if (solved.solution.dual_block_norm(s) >
          solved.solution.dual_block_norm(victim))
        victim = s;

    std::vector<int> keep_pos;
    keep_pos.reserve(sp.num_scenarios() - 1);
    for (int s = 0; s < sp.num_scenarios(); ++s)
      if (s != victim) keep_pos.push_back(s);

    ScenarioProblem sp_next = sp.subset(keep_pos);
    std::vector<int> current_next;
    current_next.reserve(keep_pos.size());
    for (int s : keep_pos) current_next.push_back(current[s]);

    SpResult solved_next = solve_sp(sp_next);
    trace.solve_seconds += solved_next.report.solve_seconds;
    if (solved_next.solution.status != LpStatus::kOptimal)
      throw IncompleteTraceError(
          "sample_discard_baseline: re-solve failed after discard (" +
              std::string(to_string(solved_next.solution.status)) + ")",
          std::move(trace));
    const std::vector<int> support_next =
        support_dual(sp_next, solved_next, setup.support);

    // Charge every removal against the certificate; N stays at the number
    // of scenarios originally drawn.
    const Certificate cert_next = make_certificate(
        int(support_next.size()) + discards + 1, n0, budget.beta);
    if (cert_next.posterior_epsilon > budget.epsilon) break;  // roll back

    sp = std::move(sp_next);
    solved = std::move(solved_next);
    support = support_next;
    current = std::move(current_next);
    cert = cert_next;
    ++discards;
    trace.rows.push_back({int(trace.rows.size()) + 1, n0 - discards,
                          int(support.size()), solved.solution.objective,
                          cert.posterior_epsilon});
  }

  trace.problem = std::move(sp);
  trace.solution = solved.solution;
  trace.certificate = cert;
  trace.record_indices = current;
  return trace;
}

void write_trace_csv(const std::string& path, const RiskTuningTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace CSV: " + path);
  out << "j,N_j,h_j,objective,epsilon_j\n";
  char buf[128];
  for (const TraceRow& r : trace.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%lld,%d,%.10g,%.10g\n", r.iteration,
                  static_cast<long long>(r.sample_size), r.complexity,
                  r.objective, r.epsilon);
    out << buf;
  }
}

}  // namespace ccd
