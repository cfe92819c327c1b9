#include "ccdispatch/certificates.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ccd {

namespace {

constexpr std::int64_t kMaxSampleSize = 10'000'000;

double log_choose(std::int64_t n, std::int64_t i) {
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(i) + 1.0) -
         std::lgamma(double(n - i) + 1.0);
}

void check_tail_args(int h, std::int64_t n) {
  if (h < 1) throw std::invalid_argument("binomial_tail: h must be >= 1");
  if (n < h) throw std::invalid_argument("binomial_tail: n must be >= h");
}

}  // namespace

double binomial_tail(int h, std::int64_t n, double epsilon) {
  check_tail_args(h, n);
  if (epsilon <= 0.0) return 1.0;
  if (epsilon >= 1.0) return 0.0;

  const double log_eps = std::log(epsilon);
  const double log_1me = std::log1p(-epsilon);
  double sum = 0.0;
  for (int i = 0; i < h; ++i) {
    const double t =
        log_choose(n, i) + double(i) * log_eps + double(n - i) * log_1me;
    sum += std::exp(t);
  }
  return sum < 1.0 ? sum : 1.0;
}

std::int64_t sample_size(int h, const RiskBudget& budget) {
  if (h < 1) throw std::invalid_argument("sample_size: h must be >= 1");
  if (!budget.valid()) throw std::invalid_argument("sample_size: bad budget");

  // The tail is monotone nonincreasing in n for fixed (h, epsilon):
  // exponential bracket, then binary search for the first n below beta.
  std::int64_t lo = h;
  if (binomial_tail(h, lo, budget.epsilon) <= budget.beta) return lo;
  std::int64_t hi = lo;
  while (true) {
    hi = hi * 2 + 1;
    if (hi > kMaxSampleSize)
      throw std::overflow_error("sample_size: exceeds 10^7 scenarios");
    if (binomial_tail(h, hi, budget.epsilon) <= budget.beta) break;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (binomial_tail(h, mid, budget.epsilon) <= budget.beta)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double posterior_risk(int h, std::int64_t n, double beta) {
  check_tail_args(h, n);
  if (beta <= 0.0 || beta >= 1.0)
    throw std::invalid_argument("posterior_risk: beta must be in (0,1)");

  // tail(eps) decreases continuously from 1 (eps -> 0) to 0 (eps -> 1).
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (binomial_tail(h, n, mid) > beta)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Certificate make_certificate(int h, std::int64_t n, double beta) {
  Certificate c;
  c.complexity_h = h;
  c.sample_count_n = n;
  c.posterior_epsilon = h >= 1 ? posterior_risk(h, n, beta) : 0.0;
  return c;
}

}  // namespace ccd
