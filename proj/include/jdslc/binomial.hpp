#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace jdslc::binom {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)).
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

/// log(sum exp(v)) over a range; -inf for an empty range.
double log_sum_exp(const double* begin, const double* end);
inline double log_sum_exp(const std::vector<double>& v) {
  return log_sum_exp(v.data(), v.data() + v.size());
}

/// Table of log n! for n = 0..max_n.
class LogFactorials {
 public:
  explicit LogFactorials(int max_n);
  int max_n() const { return static_cast<int>(table_.size()) - 1; }
  double operator()(int n) const { return table_[static_cast<std::size_t>(n)]; }
  double log_choose(int n, int k) const {
    if (k < 0 || k > n) return kNegInf;
    return table_[n] - table_[k] - table_[n - k];
  }

 private:
  std::vector<double> table_;
};

/// log binopmf(j; n, p), exact at p in {0, 1}.
double log_pmf(const LogFactorials& lf, int j, int n, double p);

/// log binocdf(j; n, p); 0 for j >= n, -inf for j < 0.
double log_cdf(const LogFactorials& lf, int j, int n, double p);

/// log binocdf(j; n, p) for j = 0..upto (clamped values beyond n are 0).
std::vector<double> log_cdf_row(const LogFactorials& lf, int n, double p, int upto);

/// Linear-scale pmf and cdf by direct summation, for small reference
/// computations.
double pmf(const LogFactorials& lf, int j, int n, double p);
double cdf(const LogFactorials& lf, int j, int n, double p);

}  // namespace jdslc::binom
