#pragma once

#include <cstdint>

namespace ccd {

/// Risk budget (epsilon, beta): the solution must be feasible for a fresh
/// uncertainty draw with probability >= 1 - epsilon, and that statement
/// itself holds with confidence >= 1 - beta over the sampled scenarios.
struct RiskBudget {
  double epsilon = 0.05;
  double beta = 1e-3;

  bool valid() const {
    return epsilon > 0.0 && epsilon < 1.0 && beta > 0.0 && beta < 1.0;
  }
};

/// Risk statement attached to a solved scenario problem: with confidence
/// 1 - beta, the violation probability is at most posterior_epsilon, given
/// sample_count_n scenarios and observed complexity complexity_h.
struct Certificate {
  int complexity_h = 0;
  std::int64_t sample_count_n = 0;
  double posterior_epsilon = 0.0;
};

/// Beta-distribution tail sum_{i=0}^{h-1} C(n,i) eps^i (1-eps)^(n-i),
/// evaluated term-by-term in log space. Boundary values eps <= 0 and
/// eps >= 1 return the limits 1 and 0.
double binomial_tail(int h, std::int64_t n, double epsilon);

/// Smallest N >= h such that binomial_tail(h, N, epsilon) <= beta.
/// Throws std::overflow_error if the answer would exceed 10^7.
std::int64_t sample_size(int h, const RiskBudget& budget);

/// The unique epsilon in (0,1) with binomial_tail(h, n, epsilon) = beta.
double posterior_risk(int h, std::int64_t n, double beta);

/// Convenience: certificate for an observed complexity h at sample size n.
Certificate make_certificate(int h, std::int64_t n, double beta);

}  // namespace ccd
