#include "ccdispatch/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ccd {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

// Two-phase full-tableau simplex over min cost'z s.t. T z = rhs, z >= 0.
// Small dense problems only; every pivot is O(m * ncols).
struct StandardForm {
  Eigen::MatrixXd A;  // m x ncols, as given (b may be negative)
  Eigen::VectorXd b;
  Eigen::VectorXd cost;
};

struct StandardResult {
  LpStatus status = LpStatus::kNumericalFailure;
  const char* note = "";
  Eigen::VectorXd z;      // primal (ncols)
  Eigen::VectorXd y;      // duals of the equality rows (m)
  double objective = 0.0;
  int iterations = 0;
};

struct Tableau {
  Eigen::MatrixXd T;
  Eigen::VectorXd rhs;
  std::vector<int> basis;

  void pivot(int row, int col) {
    const double p = T(row, col);
    T.row(row) /= p;
    rhs(row) /= p;
    for (int r = 0; r < T.rows(); ++r) {
      if (r == row) continue;
      const double f = T(r, col);
      if (f != 0.0) {
        T.row(r) -= f * T.row(row);
        rhs(r) -= f * rhs(row);
        if (rhs(r) < 0.0 && rhs(r) > -1e-11) rhs(r) = 0.0;
      }
    }
    basis[row] = col;
  }
};

enum class PhaseResult { kOptimal, kUnbounded, kIterationLimit };

PhaseResult run_simplex(Tableau& tab, const Eigen::VectorXd& cost,
                        int allowed_cols, double pivot_tol, int max_iters,
                        int& iters) {
  const int m = int(tab.T.rows());
  Eigen::VectorXd y(m);

  int stall = 0;
  double last_obj = std::numeric_limits<double>::infinity();
  const int bland_after = 2 * m + 20;

  for (; iters < max_iters; ++iters) {
    for (int r = 0; r < m; ++r) y(r) = cost(tab.basis[r]);
    const bool bland = stall > bland_after;
    int enter = -1;
    double best = -pivot_tol;
    for (int j = 0; j < allowed_cols; ++j) {
      const double rj = cost(j) - y.dot(tab.T.col(j));
      if (rj < best) {
        if (bland) {
          enter = j;
          break;
        }
        best = rj;
        enter = j;
      }
    }
    if (enter < 0) return PhaseResult::kOptimal;

    // Ratio test. Among ties, Bland mode takes the lowest basis label
    // (anti-cycling); otherwise prefer the largest pivot magnitude to keep
    // the basis well conditioned.
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      const double a = tab.T(r, enter);
      if (a > pivot_tol) {
        const double ratio = tab.rhs(r) / a;
        if (ratio < best_ratio) best_ratio = ratio;
      }
    }
    if (best_ratio == std::numeric_limits<double>::infinity())
      return PhaseResult::kUnbounded;
    const double window = 1e-9 * (1.0 + std::abs(best_ratio));
    double best_pivot = 0.0;
    for (int r = 0; r < m; ++r) {
      const double a = tab.T(r, enter);
      if (a > pivot_tol && tab.rhs(r) / a <= best_ratio + window) {
        if (bland) {
          if (leave < 0 || tab.basis[r] < tab.basis[leave]) leave = r;
        } else if (a > best_pivot) {
          best_pivot = a;
          leave = r;
        }
      }
    }

    tab.pivot(leave, enter);

    double obj = 0.0;
    for (int r = 0; r < m; ++r) obj += cost(tab.basis[r]) * tab.rhs(r);
    if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
      stall = 0;
      last_obj = obj;
    } else {
      ++stall;
    }
  }
  return PhaseResult::kIterationLimit;
}

// Solves the standard form with artificial-variable phase 1 and returns
// primal, equality-row duals and status.
StandardResult solve_standard(const StandardForm& p, double pivot_tol,
                              int max_iters) {
  const int m = int(p.A.rows());
  const int n = int(p.A.cols());
  StandardResult res;
  res.z = Eigen::VectorXd::Zero(n);
  res.y = Eigen::VectorXd::Zero(m);
  if (m == 0) {
    res.status = LpStatus::kOptimal;
    return res;
  }

  Tableau tab;
  tab.T.resize(m, n + m);
  tab.rhs.resize(m);
  tab.basis.assign(m, -1);
  Eigen::VectorXd row_sign(m);
  for (int r = 0; r < m; ++r) {
    const double s = p.b(r) < 0.0 ? -1.0 : 1.0;
    row_sign(r) = s;
    tab.T.row(r).head(n) = s * p.A.row(r);
    tab.T.row(r).tail(m).setZero();
    tab.T(r, n + r) = 1.0;
    tab.rhs(r) = s * p.b(r);
    tab.basis[r] = n + r;
  }

  // Phase 1.
  Eigen::VectorXd cost1 = Eigen::VectorXd::Zero(n + m);
  cost1.tail(m).setOnes();
  int iters = 0;
  PhaseResult pr = run_simplex(tab, cost1, n + m, pivot_tol, max_iters, iters);
  res.iterations = iters;
  if (pr == PhaseResult::kIterationLimit) {
    res.note = "phase-1 iteration limit";
    return res;
  }
  double phase1 = 0.0;
  for (int r = 0; r < m; ++r)
    if (tab.basis[r] >= n) phase1 += tab.rhs(r);
  const double bscale = 1.0 + p.b.cwiseAbs().maxCoeff();
  if (phase1 > 1e-8 * bscale) {
    res.status = LpStatus::kInfeasible;
    return res;
  }
  // Pivot zero-level artificials out; take the largest available pivot in
  // the row so the repaired basis stays well conditioned.
  for (int r = 0; r < m; ++r) {
    if (tab.basis[r] < n) continue;
    int jbest = -1;
    double abest = 1e-7;
    for (int j = 0; j < n; ++j)
      if (std::abs(tab.T(r, j)) > abest) {
        abest = std::abs(tab.T(r, j));
        jbest = j;
      }
    if (jbest >= 0) tab.pivot(r, jbest);
  }

  // Phase 2: artificial columns barred from entering.
  Eigen::VectorXd cost2 = Eigen::VectorXd::Zero(n + m);
  cost2.head(n) = p.cost;
  int iters2 = 0;
  pr = run_simplex(tab, cost2, n, pivot_tol, max_iters, iters2);
  res.iterations += iters2;
  if (pr == PhaseResult::kIterationLimit) {
    res.note = "phase-2 iteration limit";
    return res;
  }
  if (pr == PhaseResult::kUnbounded) {
    res.status = LpStatus::kUnbounded;
    return res;
  }

  for (int r = 0; r < m; ++r)
    if (tab.basis[r] < n) res.z(tab.basis[r]) = tab.rhs(r);
  res.objective = p.cost.dot(res.z);

  // Duals: solve B'y = c_B against the pristine columns, then undo the row
  // negations. A rank-revealing solve tolerates the nearly dependent bases
  // degenerate pivoting can leave behind.
  Eigen::MatrixXd B(m, m);
  Eigen::VectorXd cB(m);
  for (int r = 0; r < m; ++r) {
    const int j = tab.basis[r];
    if (j < n)
      B.col(r) = p.A.col(j).cwiseProduct(row_sign);
    else
      B.col(r) = Eigen::VectorXd::Unit(m, j - n);
    cB(r) = cost2(j);
  }
  res.y = row_sign.cwiseProduct(
      B.transpose().colPivHouseholderQr().solve(cB));
  res.status = LpStatus::kOptimal;
  return res;
}

}  // namespace

LpSolution solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& b, const std::vector<bool>& is_eq,
                    const LpOptions& options) {
  const int n = int(c.size());
  const int m = int(A.rows());
  if (A.cols() != n || b.size() != m || int(is_eq.size()) != m)
    throw std::invalid_argument("solve_lp: dimension mismatch");

  LpSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  sol.duals = Eigen::VectorXd::Zero(m);
  if (m == 0) {
    sol.status = c.isZero(0.0) ? LpStatus::kOptimal : LpStatus::kUnbounded;
    return sol;
  }

  // The artifact's problems have few variables and many rows, so we solve
  // the DUAL in standard form: its tableau is n rows deep regardless of m.
  //
  //   primal: min c'x  s.t.  A_i x <= b_i (i in I),  A_e x = b_e (e in E)
  //   dual:   min b'mu s.t.  sum_i mu_i A_i + sum_e lam_e A_e = -c,
  //           mu >= 0, lam free (split into lam+ - lam-).
  //
  // The dual's primal values are the artifact's multipliers (Lagrangian
  // convention c + A'mu = 0); the dual's equality-row duals are -x.
  int n_eq = 0;
  for (int r = 0; r < m; ++r) n_eq += is_eq[r] ? 1 : 0;
  const int cols = m + n_eq;

  // Column scaling keeps the stationarity rows well conditioned.
  Eigen::VectorXd row_scale(m);
  for (int r = 0; r < m; ++r) {
    const double mx = A.row(r).cwiseAbs().maxCoeff();
    row_scale(r) = mx > 0.0 ? 1.0 / mx : 1.0;
  }

  StandardForm d;
  d.A.resize(n, cols);
  d.cost.resize(cols);
  {
    int extra = m;
    for (int r = 0; r < m; ++r) {
      d.A.col(r) = A.row(r).transpose() * row_scale(r);
      d.cost(r) = b(r) * row_scale(r);
      if (is_eq[r]) {
        d.A.col(extra) = -d.A.col(r);
        d.cost(extra) = -d.cost(r);
        ++extra;
      }
    }
  }
  d.b = -c;

  const int max_iters =
      options.max_iterations > 0 ? options.max_iterations : 400 + 60 * (m + n);
  const StandardResult res = solve_standard(d, options.pivot_tol, max_iters);
  sol.iterations = res.iterations;
  sol.note = res.note;

  switch (res.status) {
    case LpStatus::kOptimal:
      break;
    case LpStatus::kInfeasible:
      // The stationarity system has no multiplier solution: the primal has
      // an unbounded improving ray. (Our problem family always has a
      // feasible dual when the primal is feasible.)
      sol.status = LpStatus::kUnbounded;
      return sol;
    case LpStatus::kUnbounded:
      sol.status = LpStatus::kInfeasible;
      return sol;
    default:
      sol.status = LpStatus::kNumericalFailure;
      return sol;
  }

  // Multipliers: fold the split equality columns back together.
  {
    int extra = m;
    for (int r = 0; r < m; ++r) {
      double mu = res.z(r) * row_scale(r);
      if (is_eq[r]) {
        mu -= res.z(extra) * row_scale(r);
        ++extra;
      }
      sol.duals(r) = mu;
    }
  }
  // The stationarity rows' own multipliers are a primal optimum.
  sol.x = res.y;
  sol.objective = c.dot(sol.x);
  sol.status = LpStatus::kOptimal;

  // Strong duality gives c'x = -(dual standard-form objective), and the
  // extracted x must satisfy the rows it came from; violations signal a
  // numerical breakdown worth surfacing.
  double primal_infeas = 0.0;
  for (int r = 0; r < m; ++r) {
    const double resid = A.row(r).dot(sol.x) - b(r);
    primal_infeas =
        std::max(primal_infeas, is_eq[r] ? std::abs(resid) : resid);
  }
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  const double gap = std::abs(-res.objective - sol.objective);
  if (gap > 1e-6 * (1.0 + std::abs(sol.objective)) + 1e-6 ||
      primal_infeas > 1e-6 * scale) {
    sol.status = LpStatus::kNumericalFailure;
    sol.note = "duality gap or infeasible extraction";
  }
  return sol;
}

}  // namespace ccd
