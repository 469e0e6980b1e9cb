#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "jdslc/table.hpp"

namespace jdslc {

/// Probability tolerance on the total mass of a joint pmf.
inline constexpr double kMassTolerance = 1e-12;

/// Finite joint distribution of a hidden semantic source S and an observed
/// data source X. Rows of the joint table are semantic letters, columns are
/// data letters. The object is immutable once built; validity is checked by
/// validate_source() rather than on construction so that diagnostics can list
/// every problem at once.
class JointSource {
 public:
  JointSource() = default;
  JointSource(Table joint_pmf, std::vector<std::string> semantic_alphabet = {},
              std::vector<std::string> data_alphabet = {});

  std::size_t semantic_size() const { return joint_.rows(); }
  std::size_t data_size() const { return joint_.cols(); }

  const Table& joint_pmf() const { return joint_; }
  double joint(std::size_t s, std::size_t x) const { return joint_(s, x); }

  /// P_X(x).
  double data_marginal(std::size_t x) const { return marginal_[x]; }
  const std::vector<double>& data_marginal() const { return marginal_; }

  /// P_{S|X}(s|x); NaN when P_X(x) = 0.
  double conditional(std::size_t s, std::size_t x) const { return conditional_(s, x); }

  /// True when P_X(x) > 0. Unobserved letters are excluded from expectations.
  bool observed(std::size_t x) const { return marginal_[x] > 0.0; }

  const std::vector<std::string>& semantic_alphabet() const { return semantic_names_; }
  const std::vector<std::string>& data_alphabet() const { return data_names_; }

  /// Same conditional P_{S|X}, new data marginal. Used for perturbation
  /// studies of the rate-distortion function with respect to P_X.
  JointSource with_data_marginal(const std::vector<double>& px) const;

 private:
  Table joint_;
  std::vector<double> marginal_;
  Table conditional_;
  std::vector<std::string> semantic_names_;
  std::vector<std::string> data_names_;
};

/// Per-letter distortion measures plus the derived surrogate semantic
/// distortion dbar_s(x, z) = E[d_s(S, z) | X = x].
struct DistortionSpec {
  Table ds_table;      ///< |S| x |S_hat|
  Table dx_table;      ///< |A| x |A_hat|
  Table surrogate_ds;  ///< |A| x |S_hat|; NaN rows for unobserved x
  std::vector<std::string> semantic_recon_alphabet;
  std::vector<std::string> data_recon_alphabet;

  std::size_t semantic_recon_size() const { return ds_table.cols(); }
  std::size_t data_recon_size() const { return dx_table.cols(); }
};

/// Maximum admissible expected distortions (d_s, d_x).
struct DistortionPair {
  double ds = 0.0;
  double dx = 0.0;
};

/// One invariant violation found by validate_source().
struct Violation {
  std::string location;
  std::string message;
};

std::vector<Violation> validate_source(const JointSource& source);

/// Throws InvalidInput listing every violation, if any.
void require_valid(const JointSource& source);

/// dbar_s(x, z) = sum_s P_{S|X}(s|x) d_s(s, z). Rows for P_X(x) = 0 are NaN.
Table surrogate_distortion(const JointSource& source, const Table& ds_table);

/// Validates the tables against the source and fills in the surrogate.
DistortionSpec make_distortion_spec(const JointSource& source, Table ds_table, Table dx_table,
                                    std::vector<std::string> semantic_recon_alphabet = {},
                                    std::vector<std::string> data_recon_alphabet = {});

/// Componentwise lower corner of the admissible region:
/// ds_min = E[min_z dbar_s(X, z)], dx_min = E[min_y d_x(X, y)].
DistortionPair admissible_bounds(const JointSource& source, const DistortionSpec& spec);

/// Smallest budgets at which a constant reconstruction meets both
/// constraints: min_z E[dbar_s(X, z)] and min_y E[d_x(X, y)]. At or above
/// both the rate is zero.
DistortionPair zero_rate_thresholds(const JointSource& source, const DistortionSpec& spec);

bool is_admissible(const DistortionPair& pair, const DistortionPair& bounds,
                   double tol = kMassTolerance);

}  // namespace jdslc
