#include <cmath>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "doctest.h"

#include "jdslc/binomial.hpp"

using namespace jdslc::binom;

namespace {

// pmf row by the ratio recurrence, linear scale.
std::vector<double> recurrence_row(int n, double p) {
  std::vector<double> row(static_cast<std::size_t>(n) + 1);
  row[0] = std::pow(1 - p, n);
  for (int j = 0; j < n; ++j) row[j + 1] = row[j] * (n - j) / (j + 1) * p / (1 - p);
  return row;
}

}  // namespace

TEST_SUITE("binomial") {
  TEST_CASE("pmf matches the ratio recurrence") {
    const LogFactorials lf(100);
    for (double p : {0.5, 0.2, 0.0075}) {
      const auto row = recurrence_row(60, p);
      for (int j = 0; j <= 60; ++j) {
        if (row[j] < 1e-250) continue;
        CHECK(std::exp(log_pmf(lf, j, 60, p)) == doctest::Approx(row[j]).epsilon(1e-11));
      }
    }
  }

  TEST_CASE("degenerate success probabilities") {
    const LogFactorials lf(10);
    CHECK(log_pmf(lf, 0, 7, 0.0) == 0.0);
    CHECK(log_pmf(lf, 1, 7, 0.0) == kNegInf);
    CHECK(log_pmf(lf, 7, 7, 1.0) == 0.0);
    CHECK(log_pmf(lf, 6, 7, 1.0) == kNegInf);
    CHECK(log_pmf(lf, -1, 7, 0.3) == kNegInf);
    CHECK(log_pmf(lf, 8, 7, 0.3) == kNegInf);
    CHECK(log_cdf(lf, 0, 0, 0.5) == 0.0);
  }

  TEST_CASE("cdf in log space over both tails") {
    const int n = 2000;
    const LogFactorials lf(n);
    for (double p : {0.5, 0.2, 0.01}) {
      const boost::math::binomial_distribution<double> dist(n, p);
      for (int j : {0, 3, 50, 300, 400, 900, 1000, 1100, 1900, 1999}) {
        const double ours = log_cdf(lf, j, n, p);
        const double lower = boost::math::cdf(dist, j);
        if (lower > 1e-300) CHECK(ours == doctest::Approx(std::log(lower)).epsilon(1e-9));
        if (lower > 0.5) {
          // The upper tail must survive the complement.
          const double upper = boost::math::cdf(boost::math::complement(dist, j));
          if (upper > 1e-300) CHECK(-std::expm1(ours) == doctest::Approx(upper).epsilon(1e-6));
        }
      }
      CHECK(log_cdf(lf, n, n, p) == 0.0);
      CHECK(log_cdf(lf, -1, n, p) == kNegInf);
    }
  }

  TEST_CASE("row of log cdfs agrees with single evaluations") {
    const LogFactorials lf(300);
    const auto row = log_cdf_row(lf, 250, 0.3, 260);
    REQUIRE(row.size() == 261);
    for (int j = 0; j <= 260; j += 13) {
      CHECK(row[j] == doctest::Approx(log_cdf(lf, j, 250, 0.3)).epsilon(1e-12));
    }
    CHECK(row[255] == 0.0);
  }

  TEST_CASE("linear pmf sums to one and the cdf accumulates it") {
    const LogFactorials lf(40);
    double total = 0.0;
    for (int j = 0; j <= 40; ++j) {
      total += pmf(lf, j, 40, 0.37);
      CHECK(cdf(lf, j, 40, 0.37) == doctest::Approx(total).epsilon(1e-13));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("log-space sums") {
    CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
    CHECK(log_add(kNegInf, 1.5) == 1.5);
    CHECK(log_add(-1000.0, -1000.0) == doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-15));
    const std::vector<double> v = {-800.0, -801.0, -802.0};
    CHECK(log_sum_exp(v) == doctest::Approx(-800.0 + std::log(1 + std::exp(-1.0) + std::exp(-2.0))).epsilon(1e-15));
    CHECK(log_sum_exp(std::vector<double>{}) == kNegInf);
    CHECK(LogFactorials(20).log_choose(20, 10) == doctest::Approx(std::log(184756.0)).epsilon(1e-14));
  }
}
