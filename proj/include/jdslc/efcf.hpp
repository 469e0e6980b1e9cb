#pragma once

#include <bitset>
#include <string>

#include "json.hpp"

#include "jdslc/model_io.hpp"
#include "jdslc/rd_numeric.hpp"

namespace jdslc {

// Erased fair coin flips: S is a fair bit, X is S passed through a binary
// erasure channel with erasure probability delta. Letters are ordered
// S, Z in {0, 1} and X, Y in {0, 1, e}; all distortions are Hamming, with
// d_x(e, e) = 0.

inline constexpr std::size_t kErased = 2;

/// Slack used when testing the closed region inequalities.
inline constexpr double kRegionSlack = 1e-12;

struct EfcfParams {
  double delta = 0.0;
  DistortionPair pair;
};

/// Throws InvalidInput unless 0 < delta < 1/3, ds >= delta/2 and dx >= 0.
void validate(const EfcfParams& params);

enum class RegionLabel { D1 = 0, D2 = 1, D3 = 2, D4 = 3, D5 = 4 };

std::string to_string(RegionLabel label);

struct Region {
  RegionLabel primary = RegionLabel::D5;
  std::bitset<5> members;  ///< bit i set iff the pair lies in region D(i+1)

  bool contains(RegionLabel r) const { return members.test(static_cast<std::size_t>(r)); }
  bool on_boundary() const { return members.count() > 1; }
  /// Space-separated member labels, e.g. "D1 D4".
  std::string members_string() const;
};

/// Labels the pair with every closed region containing it. The primary label
/// follows the priority D4 > D1 > D2 > D3 > D5.
Region classify_region(const EfcfParams& params);

/// Binary and ternary entropies in nats with 0 log 0 = 0.
double binary_entropy(double p);
double ternary_entropy(double a, double b, double c);

double efcf_rate(const EfcfParams& params);

/// The source, Hamming distortion tables and alphabets for erasure rate delta.
SourceFile efcf_instance(double delta);

/// Optimal test channel of the primary region, with its edge pmf.
TestChannel efcf_channel(const EfcfParams& params);

struct EfcfPoint {
  EfcfParams params;
  Region region;
  double rate = 0.0;
  double lambda_s = 0.0;
  double lambda_x = 0.0;
  double j0 = 0.0;  ///< tilted information of an unerased letter
  double je = 0.0;  ///< tilted information of the erasure
  double v = 0.0;
  double v_tilde = 0.0;
  double p_y_erasure = 0.0;
  TestChannel channel;
};

/// Multipliers are the negated partial derivatives of the primary region's
/// rate; a multiplier is +inf where that derivative diverges (budgets on the
/// admissible boundary). Tilted informations of D4 use their closed forms;
/// other regions evaluate the defining expectation under the region channel.
EfcfPoint efcf_point(const EfcfParams& params);

/// Tilted information of data letter x computed from the expectation over an
/// edge pmf, with the convention that an infinite multiplier times a zero
/// slack contributes zero.
double tilted_from_edge(const DistortionSpec& spec, const std::vector<double>& edge, std::size_t x,
                        double lambda_s, double lambda_x, const DistortionPair& pair);

nlohmann::json to_json(const EfcfPoint& point);

}  // namespace jdslc
