#include "jdslc/binomial.hpp"

#include <algorithm>

#include <boost/math/special_functions/gamma.hpp>

#include "jdslc/error.hpp"

namespace jdslc::binom {

double log_sum_exp(const double* begin, const double* end) {
  double m = kNegInf;
  for (const double* p = begin; p != end; ++p) m = std::max(m, *p);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (const double* p = begin; p != end; ++p) acc += std::exp(*p - m);
  return m + std::log(acc);
}

LogFactorials::LogFactorials(int max_n) {
  if (max_n < 0) throw InvalidInput("factorial table size must be nonnegative");
  table_.resize(static_cast<std::size_t>(max_n) + 1);
  table_[0] = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    // boost::math::lgamma is reentrant, unlike the glibc lgamma.
    table_[n] = boost::math::lgamma(static_cast<double>(n) + 1.0);
  }
}

double log_pmf(const LogFactorials& lf, int j, int n, double p) {
  if (j < 0 || j > n) return kNegInf;
  if (p <= 0.0) return j == 0 ? 0.0 : kNegInf;
  if (p >= 1.0) return j == n ? 0.0 : kNegInf;
  return lf.log_choose(n, j) + j * std::log(p) + (n - j) * std::log1p(-p);
}

double log_cdf(const LogFactorials& lf, int j, int n, double p) {
  if (j < 0) return kNegInf;
  if (j >= n) return 0.0;
  // Sum the shorter tail and complement when the upper tail is shorter.
  double acc = kNegInf;
  if (j <= n / 2 || p >= 0.5) {
    for (int i = 0; i <= j; ++i) acc = log_add(acc, log_pmf(lf, i, n, p));
    return std::min(acc, 0.0);
  }
  for (int i = j + 1; i <= n; ++i) acc = log_add(acc, log_pmf(lf, i, n, p));
  const double upper = std::exp(acc);
  return upper < 0.5 ? std::log1p(-upper) : std::log(1.0 - upper);
}

std::vector<double> log_cdf_row(const LogFactorials& lf, int n, double p, int upto) {
  std::vector<double> row(static_cast<std::size_t>(std::max(upto, -1) + 1), 0.0);
  double acc = kNegInf;
  for (int j = 0; j <= upto; ++j) {
    if (j >= n) {
      row[j] = 0.0;
      continue;
    }
    acc = log_add(acc, log_pmf(lf, j, n, p));
    row[j] = std::min(acc, 0.0);
  }
  return row;
}

double pmf(const LogFactorials& lf, int j, int n, double p) { return std::exp(log_pmf(lf, j, n, p)); }

double cdf(const LogFactorials& lf, int j, int n, double p) {
  if (j < 0) return 0.0;
  if (j >= n) return 1.0;
  double acc = 0.0;
  for (int i = 0; i <= j; ++i) acc += pmf(lf, i, n, p);
  return std::min(acc, 1.0);
}

}  // namespace jdslc::binom
