#pragma once

#include <string>
#include <vector>

#include "jdslc/efcf.hpp"

namespace jdslc {

/// Budget in symbol counts, floor(k * d), robust to representation error in d.
int budget_count(int k, double d);

// ---------------------------------------------------------------- converse

/// Per-letter parameters of the converse statistic: an unerased letter
/// contributes j0, an erased letter je +- lambda_s / 2 with equal odds.
struct ConverseStats {
  double j0 = 0.0;
  double je = 0.0;
  double lambda_s = 0.0;
  double delta = 0.0;
};

/// Throws InvalidInput when the point has a non-finite multiplier or
/// tilted value.
ConverseStats converse_stats(const EfcfPoint& point);

struct GammaPolicy {
  enum class Kind { Fixed, HalfLogK, Grid };
  Kind kind = Kind::HalfLogK;
  double value = 0.0;  ///< used by Kind::Fixed

  /// "half-log-k", "grid" or a nonnegative number.
  static GammaPolicy parse(const std::string& text);
  std::string describe() const;
  /// The gamma values over which the bound is maximized at blocklength k.
  std::vector<double> gammas(int k) const;
};

/// Exact law of a finite-support statistic, stored as sorted atoms with
/// upper-tail masses.
class TailDistribution {
 public:
  TailDistribution() = default;
  /// Atoms need not be sorted or distinct.
  TailDistribution(std::vector<double> values, std::vector<double> masses);

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  /// P[W >= threshold].
  double tail(double threshold) const;

  /// max(0, P[W >= gamma + log_m] - exp(-gamma)).
  double bound(double log_m, double gamma) const;
  /// Largest bound over the policy's gamma values.
  double bound(double log_m, const GammaPolicy& policy, int k) const;

  /// Infimum of log_m >= 0 at which bound(log_m, gamma) <= epsilon.
  double min_log_m(double epsilon, double gamma) const;
  double min_log_m(double epsilon, const GammaPolicy& policy, int k) const;

 private:
  std::vector<double> values_;  // ascending
  std::vector<double> tail_;    // tail_[i] = sum_{j >= i} mass_j
};

/// Law of (k - t) j0 + t je + lambda_s (i - t/2) with t ~ Bin(k, delta),
/// i | t ~ Bin(t, 1/2).
TailDistribution converse_distribution(const ConverseStats& stats, int k);

double converse_epsilon(const ConverseStats& stats, int k, double log_m, double gamma);

/// Maximum number of distinct sum values kept by the convolution.
inline constexpr std::size_t kMaxConvolutionAtoms = 10000;

/// Law of the i.i.d. sum of k per-letter values, by repeated convolution
/// with values closer than 1e-12 merged.
TailDistribution iid_sum_distribution(const std::vector<double>& values,
                                      const std::vector<double>& pmf, int k);

double converse_epsilon_lambda0(const std::vector<double>& jx_values, const std::vector<double>& px,
                                int k, double log_m, const GammaPolicy& policy);

// ----------------------------------------------------------- achievability

/// Mass of the erasure-count law left out of an evaluation.
inline constexpr double kDefaultTailTolerance = 1e-12;
/// Allowance for floating-point rounding added to every reported error bound.
inline constexpr double kRoundingAllowance = 1e-12;

struct BoundValue {
  double value = 0.0;
  double error_bound = 0.0;  ///< |reported - exact| <= error_bound
};

/// Random-coding error as a function of log M. Each (t, i) cell holds its
/// probability weight and log(-log(1 - A)), where A is the probability that
/// one random codeword succeeds in that cell, so the cell contributes
/// weight * exp(-M (-log(1 - A))).
class AchievabilityTable {
 public:
  struct Cell {
    double weight = 0.0;
    double log_hazard = 0.0;  ///< -inf when A = 0, +inf when A = 1
  };

  AchievabilityTable() = default;
  AchievabilityTable(std::vector<Cell> cells, double omitted_mass);

  double epsilon(double log_m) const;
  BoundValue evaluate(double log_m) const { return {epsilon(log_m), error_bound()}; }
  /// Limit of the error as M grows: mass of cells no codeword can serve.
  double floor() const;
  double error_bound() const { return omitted_mass_ + kRoundingAllowance; }
  double omitted_mass() const { return omitted_mass_; }
  std::size_t cells() const { return cells_.size(); }

 private:
  std::vector<Cell> cells_;
  double omitted_mass_ = 0.0;
};

/// Ensemble error of i.i.d. codewords from the optimal edge law with the
/// encoder that minimizes the conditional excess probability, for pairs in
/// D1 or D4. Erasure counts outside the kept range carry at most
/// `tail_tolerance` mass; pass 0 to keep every count.
AchievabilityTable achievability_d1d4(const EfcfParams& params, int k,
                                      double tail_tolerance = kDefaultTailTolerance);

/// Same with uniform binary codewords that never use the erasure symbol,
/// which is the optimal edge law in D2 and D3. Also accepted in D5.
AchievabilityTable achievability_d2d3(const EfcfParams& params, int k,
                                      double tail_tolerance = kDefaultTailTolerance);

/// Dispatches on the primary region label.
AchievabilityTable achievability_table(const EfcfParams& params, int k,
                                       double tail_tolerance = kDefaultTailTolerance);

BoundValue achieve_epsilon_d1d4(const EfcfParams& params, int k, double m);
BoundValue achieve_epsilon_d2d3(const EfcfParams& params, int k, double m);

/// The five nested sums over (t, i, j, r, v) evaluated term by term in
/// linear scale without truncation. Intended for small k only.
double achieve_epsilon_d1d4_nested(const EfcfParams& params, int k, double m);
/// The triple sum for D2/D3 evaluated term by term without truncation.
double achieve_epsilon_d2d3_nested(const EfcfParams& params, int k, double m);

// --------------------------------------------------------------- inversion

struct RateResult {
  double rate = 0.0;   ///< log_m / k, nats per symbol
  double log_m = 0.0;  ///< nats
  double epsilon = 0.0;       ///< bound value at log_m (converse: just above it)
  double error_bound = 0.0;   ///< numerical error bound on epsilon
};

/// Infimum of log M at which the converse bound drops to epsilon.
RateResult invert_rate(const TailDistribution& converse, int k, double epsilon,
                       const GammaPolicy& policy);

/// Smallest integer M whose achievability bound is at most epsilon. Above
/// 2^53 codewords M is located on a continuous log scale instead.
RateResult invert_rate(const AchievabilityTable& table, int k, double epsilon);

// ------------------------------------------------------------ second order

/// Inverse of the standard normal complementary cdf.
double qinv(double epsilon);

double second_order_rate(double rate, double v_tilde, int k, double epsilon,
                         double remainder = 0.0);
double second_order_rate(const EfcfPoint& point, int k, double epsilon, double remainder = 0.0);
double second_order_rate(const RdSolution& solution, int k, double epsilon,
                         double remainder = 0.0);

// ------------------------------------------------------------------- sweep

struct SweepOptions {
  double epsilon = 0.1;
  std::vector<int> k_list;
  GammaPolicy gamma;
  double remainder = 0.0;
  int threads = 1;
  double tail_tolerance = kDefaultTailTolerance;
};

struct SweepRecord {
  int k = 0;
  double rate_converse = 0.0;
  double rate_achievability = 0.0;
  double rate_second_order = 0.0;
  double rate_asymptotic = 0.0;
  double eps_error_bound = 0.0;
};

struct SweepCurve {
  EfcfParams params;
  double epsilon = 0.0;
  std::vector<SweepRecord> records;
};

/// Rates are in nats. Throws ComputationError naming the offending k when an
/// inversion fails or the converse exceeds the achievability rate.
SweepCurve sweep(const EfcfParams& params, const SweepOptions& options);

/// CSV with rates multiplied by `unit_scale` (1 for nats, 1/ln 2 for bits).
std::string to_csv(const SweepCurve& curve, double unit_scale, int precision);

}  // namespace jdslc
