#include "ccdispatch/support.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace ccd {

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int hw = threads > 0 ? threads : int(std::thread::hardware_concurrency());
  hw = std::max(1, std::min(hw, n));
  if (hw == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (int t = 0; t < hw; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Working set of the parent solve remapped onto the subset that keeps all
// scenarios except `removed_pos` (positions into `kept`).
std::vector<ScenRow> remap_warm(const std::vector<ScenRow>& active,
                                const std::vector<int>& kept, int removed) {
  std::vector<int> pos_of(kept.size(), -1);
  std::vector<ScenRow> out;
  out.reserve(active.size());
  // kept holds original scenario ids in subset order.
  for (const ScenRow& r : active) {
    if (r.scenario == removed) continue;
    for (std::size_t q = 0; q < kept.size(); ++q)
      if (kept[q] == r.scenario) {
        out.push_back({int(q), r.offset});
        break;
      }
  }
  return out;
}

bool strictly_better(double obj_without, double obj_full, double rel_tol) {
  return obj_without < obj_full - rel_tol * (1.0 + std::abs(obj_full));
}

}  // namespace

std::vector<int> support_bruteforce(const ScenarioProblem& problem,
                                    const SpResult& solved,
                                    const SupportSearchOptions& options) {
  if (solved.solution.status != LpStatus::kOptimal)
    throw std::invalid_argument("support_bruteforce: solution not optimal");
  const int n = problem.num_scenarios();
  if (n == 0) return {};

  const double obj_full = solved.solution.objective;
  std::vector<char> is_support(n, 0);
  parallel_for(n, options.threads, [&](int i) {
    std::vector<int> keep;
    keep.reserve(n - 1);
    for (int s = 0; s < n; ++s)
      if (s != i) keep.push_back(s);
    const ScenarioProblem sub = problem.subset(keep);
    const SpResult r =
        solve_sp(sub, {}, remap_warm(solved.active_set, keep, i));
    if (r.solution.status != LpStatus::kOptimal)
      throw std::runtime_error("support_bruteforce: re-solve failed (" +
                               std::string(to_string(r.solution.status)) +
                               ") removing scenario " + std::to_string(i));
    if (strictly_better(r.solution.objective, obj_full, options.rel_tol))
      is_support[i] = 1;
  });

  std::vector<int> out;
  for (int i = 0; i < n; ++i)
    if (is_support[i]) out.push_back(i);
  return out;
}

std::vector<int> support_dual(const ScenarioProblem& problem,
                              const SpResult& solved,
                              const SupportSearchOptions& options,
                              SupportDualStats* stats) {
  if (solved.solution.status != LpStatus::kOptimal)
    throw std::invalid_argument("support_dual: solution not optimal");
  const int n = problem.num_scenarios();
  if (stats) *stats = {};
  if (n == 0) return {};

  std::vector<int> candidates;
  for (int i = 0; i < n; ++i)
    if (solved.solution.dual_block_nonzero(i)) candidates.push_back(i);
  if (stats) stats->candidates = int(candidates.size());
  if (candidates.empty()) return {};

  // SP_M: the problem restricted to the candidate set.
  const double obj_full = solved.solution.objective;
  std::vector<char> is_support(candidates.size(), 0);
  std::atomic<int> resolves{0};
  parallel_for(int(candidates.size()), options.threads, [&](int q) {
    std::vector<int> keep;
    keep.reserve(candidates.size() - 1);
    for (std::size_t p = 0; p < candidates.size(); ++p)
      if (p != std::size_t(q)) keep.push_back(candidates[p]);
    const ScenarioProblem sub = problem.subset(keep);
    const SpResult r =
        solve_sp(sub, {}, remap_warm(solved.active_set, keep, candidates[q]));
    resolves.fetch_add(1);
    if (r.solution.status != LpStatus::kOptimal)
      throw std::runtime_error("support_dual: re-solve failed (" +
                               std::string(to_string(r.solution.status)) +
                               ") removing scenario " +
                               std::to_string(candidates[q]));
    if (strictly_better(r.solution.objective, obj_full, options.rel_tol))
      is_support[q] = 1;
  });
  if (stats) stats->resolves = resolves.load();

  std::vector<int> out;
  for (std::size_t q = 0; q < candidates.size(); ++q)
    if (is_support[q]) out.push_back(candidates[q]);
  return out;
}

}  // namespace ccd
