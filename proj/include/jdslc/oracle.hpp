#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "jdslc/bounds.hpp"

namespace jdslc {

inline constexpr int kConverseEnumerationMaxK = 12;
inline constexpr int kAchieveEnumerationMaxK = 6;
inline constexpr double kAchieveEnumerationMaxM = 64;

/// Converse bound max(0, P[W >= gamma + log_m] - exp(-gamma)) by visiting
/// every data sequence and every semantic pattern on its erased positions.
double enumerate_converse_exact(const ConverseStats& stats, int k, double log_m, double gamma);

/// Ensemble error of i.i.d. codewords drawn from the region's optimal edge
/// law, by enumerating every data sequence and every codeword. Works for any
/// pair whose region channel is defined (the D1/D4 and D2/D3 schemes differ
/// only in the edge law).
double enumerate_achieve_exact(const EfcfParams& params, int k, double m);

enum class McMode { Auto, Literal, OrderStatistic };

McMode parse_mc_mode(const std::string& text);
std::string to_string(McMode mode);

struct McConfig {
  long long trials = 0;
  std::uint64_t seed = 0;
  int k = 0;
  double m = 1.0;
  EfcfParams params;
  McMode mode = McMode::Auto;
  int threads = 1;
};

/// Largest codebook simulated codeword by codeword in McMode::Auto.
inline constexpr double kLiteralMaxM = 64;

struct McReport {
  long long trials = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double theorem6_value = 0.0;
  double sigma_distance = 0.0;
  McMode mode = McMode::Auto;
};

/// Simulates the random-coding scheme with the encoder that picks the
/// codeword of smallest conditional excess probability (ties to the lowest
/// index). Trials are split over `threads` workers without changing the
/// result. Literal mode draws every codeword; order-statistic mode samples
/// the best codeword's unerased semantic mismatch count directly from its
/// exact law. Trial j uses its own generator seeded with seed ^ j.
McReport mc_ensemble(const McConfig& config);

nlohmann::json to_json(const McReport& report);

}  // namespace jdslc
