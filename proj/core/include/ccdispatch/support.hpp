#pragma once

#include <vector>

#include "ccdispatch/scenario_problem.hpp"

namespace ccd {

struct SupportSearchOptions {
  /// Strict-decrease test: obj_without < obj_full - rel_tol * (1 + |obj_full|).
  double rel_tol = 1e-9;
  int threads = 0;  // 0 = hardware concurrency
};

struct SupportDualStats {
  int candidates = 0;  // |M|, scenarios with a nonzero dual block
  int resolves = 0;    // leave-one-out solves performed
};

/// Definition-based oracle: a scenario is support iff removing it (from the
/// full set) strictly decreases the optimum. Costs N re-solves; meant for
/// N <= 50.
std::vector<int> support_bruteforce(const ScenarioProblem& problem,
                                    const SpResult& solved,
                                    const SupportSearchOptions& options = {});

/// Dual-based search: restrict to candidates M = {i : ||mu_i|| > 0}, then
/// for each i in M re-solve SP_{M-i} and keep i if the cost drops below the
/// full-problem optimum. Throws on re-solve failure, naming the index.
std::vector<int> support_dual(const ScenarioProblem& problem,
                              const SpResult& solved,
                              const SupportSearchOptions& options = {},
                              SupportDualStats* stats = nullptr);

/// Theorem-2 bound: decision variables after eliminating the equalities.
inline int helly_bound(const ScenarioProblem& problem) {
  return 2 * problem.num_generators() - 2;
}

}  // namespace ccd
