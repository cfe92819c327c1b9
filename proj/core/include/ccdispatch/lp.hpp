#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ccd {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

const char* to_string(LpStatus s);

/// Solution of min c'x over free x subject to a_i'x <= b_i (or == b_i).
/// Dual convention: at an optimum, c + A' mu = 0 with mu_i >= 0 on
/// inequality rows and mu_i (b_i - a_i'x) = 0 (complementary slackness).
struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd duals;
  double objective = 0.0;
  int iterations = 0;
  const char* note = "";  // failure diagnostics
};

struct LpOptions {
  double pivot_tol = 1e-9;
  double feas_tol = 1e-8;
  int max_iterations = 0;  // 0 = automatic from problem size
};

/// Dense two-phase primal simplex with free-variable splitting, column
/// equilibration and a Bland's-rule fallback against cycling. Intended for
/// the small working-set subproblems produced by constraint generation;
/// everything is O(m * n) per pivot.
LpSolution solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& b, const std::vector<bool>& is_eq,
                    const LpOptions& options = {});

}  // namespace ccd
