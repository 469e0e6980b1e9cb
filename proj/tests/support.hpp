#pragma once

#include <random>

#include "jdslc/efcf.hpp"
#include "jdslc/model.hpp"

namespace testing {

// The two distortion pairs of the delta = 0.2 rate-blocklength figure.
inline const jdslc::EfcfParams kAnchor{0.2, {0.176, 0.272}};
inline const jdslc::EfcfParams kAnchorTwin{0.2, {0.224, 0.256}};

inline jdslc::Table random_table(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                 double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  jdslc::Table t(rows, cols);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

inline jdslc::JointSource random_source(std::mt19937_64& rng, std::size_t ns, std::size_t nx) {
  jdslc::Table p = random_table(rng, ns, nx, 0.05, 1.0);
  double total = 0.0;
  for (double v : p.values()) total += v;
  for (auto& v : p.values()) v /= total;
  return jdslc::JointSource(std::move(p));
}

}  // namespace testing
