#include "jdslc/oracle.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <exception>
#include <thread>

#include "jdslc/binomial.hpp"
#include "jdslc/error.hpp"

namespace jdslc {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t draw(std::mt19937_64& rng, const std::vector<double>& cdf) {
  const double u = uniform01(rng);
  for (std::size_t i = 0; i + 1 < cdf.size(); ++i) {
    if (u < cdf[i]) return i;
  }
  return cdf.size() - 1;
}

std::vector<double> cumulative(const std::vector<double>& pmf) {
  std::vector<double> c(pmf.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) c[i] = acc += pmf[i];
  return c;
}

int as_count(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9) throw ComputationError("distortion is not an integer count");
  return static_cast<int>(r);
}

// Everything the simulator and the enumerator need about one scheme.
struct Scheme {
  SourceFile inst;
  std::vector<double> edge;  // [z * 3 + y]
  int bs = 0;
  int bx = 0;
};

// Compensated running sum; the enumerators add up millions of tiny terms.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    carry_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

Scheme make_scheme(const EfcfParams& params, int k) {
  Scheme s;
  s.inst = efcf_instance(params.delta);
  s.edge = efcf_channel(params).edge;
  s.bs = budget_count(k, params.pair.ds);
  s.bx = budget_count(k, params.pair.dx);
  return s;
}

}  // namespace

double enumerate_converse_exact(const ConverseStats& stats, int k, double log_m, double gamma) {
  if (k < 1 || k > kConverseEnumerationMaxK) {
    throw InvalidInput("exhaustive converse enumeration needs 1 <= k <= " +
                       std::to_string(kConverseEnumerationMaxK));
  }
  if (!(gamma >= 0.0)) throw InvalidInput("gamma must be nonnegative");
  const double p_bit = (1.0 - stats.delta) / 2.0;
  const double threshold = gamma + log_m;
  std::vector<int> letters(static_cast<std::size_t>(k), 0);  // 0, 1, 2 = erased
  Accumulator tail;
  for (;;) {
    double px = 1.0;
    std::vector<int> erased;
    for (int j = 0; j < k; ++j) {
      if (letters[j] == static_cast<int>(kErased)) {
        px *= stats.delta;
        erased.push_back(j);
      } else {
        px *= p_bit;
      }
    }
    const int t = static_cast<int>(erased.size());
    // Semantic letters on erased positions; unerased letters reveal S.
    for (unsigned pattern = 0; pattern < (1u << t); ++pattern) {
      double w = 0.0;
      int e = 0;
      for (int j = 0; j < k; ++j) {
        if (letters[j] == static_cast<int>(kErased)) {
          const double semantic_distortion = (pattern >> e) & 1u ? 1.0 : 0.0;
          w += stats.je + stats.lambda_s * (semantic_distortion - 0.5);
          ++e;
        } else {
          w += stats.j0;
        }
      }
      if (w >= threshold) tail.add(px * std::ldexp(1.0, -t));
    }
    int pos = 0;
    while (pos < k && ++letters[pos] == 3) letters[pos++] = 0;
    if (pos == k) break;
  }
  return std::max(0.0, tail.value() - std::exp(-gamma));
}

double enumerate_achieve_exact(const EfcfParams& params, int k, double m) {
  if (k < 1 || k > kAchieveEnumerationMaxK) {
    throw InvalidInput("exhaustive ensemble enumeration needs 1 <= k <= " +
                       std::to_string(kAchieveEnumerationMaxK));
  }
  if (!(m >= 1.0 && m <= kAchieveEnumerationMaxM)) {
    throw InvalidInput("exhaustive ensemble enumeration needs 1 <= M <= 64");
  }
  const Scheme sc = make_scheme(params, k);
  const JointSource& src = sc.inst.source;
  const DistortionSpec& spec = sc.inst.spec;
  const std::size_t nk = sc.edge.size();

  std::vector<std::size_t> x(static_cast<std::size_t>(k), 0);
  std::vector<std::size_t> cw(static_cast<std::size_t>(k), 0);
  Accumulator eps;
  for (;;) {
    double px = 1.0;
    int t = 0;
    for (int j = 0; j < k; ++j) {
      px *= src.data_marginal(x[j]);
      if (x[j] == kErased) ++t;
    }
    if (px > 0.0) {
      // Law of (unerased semantic distortion, data distortion) of one codeword.
      std::vector<Accumulator> hist(static_cast<std::size_t>((k + 1) * (k + 1)));
      std::fill(cw.begin(), cw.end(), 0);
      for (;;) {
        double q = 1.0;
        double a = 0.0;
        double b = 0.0;
        for (int j = 0; j < k && q > 0.0; ++j) {
          const std::size_t z = cw[j] / 3;
          const std::size_t y = cw[j] % 3;
          q *= sc.edge[cw[j]];
          if (x[j] != kErased) a += spec.surrogate_ds(x[j], z);
          b += spec.dx_table(x[j], y);
        }
        if (q > 0.0) hist[static_cast<std::size_t>(as_count(a) * (k + 1) + as_count(b))].add(q);
        int pos = 0;
        while (pos < k && ++cw[pos] == nk) cw[pos++] = 0;
        if (pos == k) break;
      }
      // Erased-position semantic mismatches against a fixed reconstruction;
      // their law is the same for every codeword.
      std::vector<double> mismatch(static_cast<std::size_t>(t) + 1, 0.0);
      for (unsigned pattern = 0; pattern < (1u << t); ++pattern) {
        double p = 1.0;
        int count = 0;
        for (int e = 0; e < t; ++e) {
          const std::size_t s = (pattern >> e) & 1u;
          p *= src.conditional(s, kErased);
          count += as_count(spec.ds_table(s, 0));
        }
        mismatch[count] += p;
      }
      double err = 0.0;
      for (int i = 0; i <= t; ++i) {
        Accumulator success;
        for (int a = 0; a <= sc.bs - i && a <= k; ++a) {
          for (int b = 0; b <= sc.bx && b <= k; ++b) success.add(hist[a * (k + 1) + b].value());
        }
        err += mismatch[i] * std::pow(std::max(0.0, 1.0 - success.value()), m);
      }
      eps.add(px * err);
    }
    int pos = 0;
    while (pos < k && ++x[pos] == 3) x[pos++] = 0;
    if (pos == k) break;
  }
  return eps.value();
}

McMode parse_mc_mode(const std::string& text) {
  if (text == "auto") return McMode::Auto;
  if (text == "literal") return McMode::Literal;
  if (text == "order") return McMode::OrderStatistic;
  throw InvalidInput("mode must be auto, literal or order, got '" + text + "'");
}

std::string to_string(McMode mode) {
  switch (mode) {
    case McMode::Auto:
      return "auto";
    case McMode::Literal:
      return "literal";
    case McMode::OrderStatistic:
      return "order";
  }
  return "auto";
}

namespace {

// One trial of the ensemble scheme. Holds the composition cache, so each
// worker owns its own instance.
class TrialRunner {
 public:
  TrialRunner(const McConfig& config, McMode mode)
      : config_(config), mode_(mode), k_(config.k), sc_(make_scheme(config.params, config.k)),
        lf_(config.k), m_(config.m) {
    const JointSource& src = sc_.inst.source;
    std::vector<double> joint_pmf;
    for (std::size_t s = 0; s < src.semantic_size(); ++s) {
      for (std::size_t x = 0; x < src.data_size(); ++x) joint_pmf.push_back(src.joint(s, x));
    }
    joint_cdf_ = cumulative(joint_pmf);
    edge_cdf_ = cumulative(sc_.edge);
    s_seq_.resize(static_cast<std::size_t>(k_));
    x_seq_.resize(static_cast<std::size_t>(k_));
    codeword_.resize(static_cast<std::size_t>(k_));
    best_.resize(static_cast<std::size_t>(k_));
  }

  bool error(long long trial) {
    std::mt19937_64 rng(config_.seed ^ static_cast<std::uint64_t>(trial));
    const std::size_t nx = sc_.inst.source.data_size();
    std::vector<int> counts(nx, 0);
    for (int j = 0; j < k_; ++j) {
      const std::size_t cell = draw(rng, joint_cdf_);
      s_seq_[j] = cell / nx;
      x_seq_[j] = cell % nx;
      ++counts[x_seq_[j]];
    }
    return mode_ == McMode::Literal ? literal_error(rng) : order_statistic_error(rng, counts);
  }

 private:
  bool literal_error(std::mt19937_64& rng) {
    const DistortionSpec& spec = sc_.inst.spec;
    int t = 0;
    for (int j = 0; j < k_; ++j) t += x_seq_[j] == kErased;
    double best_fail = std::numeric_limits<double>::infinity();
    const auto m = static_cast<long long>(m_);
    for (long long idx = 0; idx < m; ++idx) {
      double a = 0.0;
      double b = 0.0;
      for (int j = 0; j < k_; ++j) {
        codeword_[j] = draw(rng, edge_cdf_);
        const std::size_t z = codeword_[j] / 3;
        const std::size_t y = codeword_[j] % 3;
        if (x_seq_[j] != kErased) a += spec.surrogate_ds(x_seq_[j], z);
        b += spec.dx_table(x_seq_[j], y);
      }
      // Conditional excess probability given the data sequence: the data
      // part is deterministic, erased semantic mismatches are Bin(t, 1/2).
      const double fail =
          as_count(b) > sc_.bx ? 1.0 : 1.0 - binom::cdf(lf_, sc_.bs - as_count(a), t, 0.5);
      if (fail < best_fail) {
        best_fail = fail;
        best_ = codeword_;
      }
    }
    double semantic = 0.0;
    double data = 0.0;
    for (int j = 0; j < k_; ++j) {
      semantic += spec.ds_table(s_seq_[j], best_[j] / 3);
      data += spec.dx_table(x_seq_[j], best_[j] % 3);
    }
    return as_count(semantic) > sc_.bs || as_count(data) > sc_.bx;
  }

  bool order_statistic_error(std::mt19937_64& rng, const std::vector<int>& counts) {
    const std::vector<double>& f = composition_cdf(counts);
    // P[min over M codewords of the unerased count <= a] = 1 - (1 - F(a))^M.
    const double u = uniform01(rng);
    int a_best = -1;
    for (int a = 0; a <= k_; ++a) {
      const double g = f[a] >= 1.0 ? 1.0 : -std::expm1(m_ * std::log1p(-f[a]));
      if (u < g) {
        a_best = a;
        break;
      }
    }
    if (a_best < 0) return true;  // no codeword meets the data budget
    // Semantic letters on erased positions are fair and independent of the
    // codebook, so each mismatches the chosen reconstruction w.p. 1/2.
    int mismatches = 0;
    for (int j = 0; j < k_; ++j) mismatches += x_seq_[j] == kErased && s_seq_[j] != 0;
    return a_best + mismatches > sc_.bs;
  }

  // For a data composition, F(a) = P[one codeword fits the data budget and
  // has at most a unerased semantic mismatches].
  const std::vector<double>& composition_cdf(const std::vector<int>& counts) {
    auto it = cache_.find(counts);
    if (it != cache_.end()) return it->second;
    const DistortionSpec& spec = sc_.inst.spec;
    const auto w = static_cast<std::size_t>(k_) + 1;
    std::vector<double> dist(w * w, 0.0);
    std::vector<double> next(w * w, 0.0);
    dist[0] = 1.0;
    int used = 0;
    for (std::size_t x = 0; x < counts.size(); ++x) {
      for (int rep = 0; rep < counts[x]; ++rep) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int a = 0; a <= used; ++a) {
          for (int b = 0; b <= used; ++b) {
            const double p = dist[a * w + b];
            if (p == 0.0) continue;
            for (std::size_t c = 0; c < sc_.edge.size(); ++c) {
              if (sc_.edge[c] == 0.0) continue;
              const int da = x == kErased ? 0 : as_count(spec.surrogate_ds(x, c / 3));
              const int db = as_count(spec.dx_table(x, c % 3));
              next[(a + da) * w + (b + db)] += p * sc_.edge[c];
            }
          }
        }
        dist.swap(next);
        ++used;
      }
    }
    std::vector<double> cdf(w, 0.0);
    double acc = 0.0;
    for (int a = 0; a <= k_; ++a) {
      for (int b = 0; b <= std::min(sc_.bx, k_); ++b) acc += dist[a * w + b];
      cdf[a] = std::min(acc, 1.0);
    }
    return cache_.emplace(counts, std::move(cdf)).first->second;
  }

  const McConfig& config_;
  McMode mode_;
  int k_;
  Scheme sc_;
  binom::LogFactorials lf_;
  double m_;
  std::vector<double> joint_cdf_;
  std::vector<double> edge_cdf_;
  std::vector<std::size_t> s_seq_, x_seq_, codeword_, best_;
  std::map<std::vector<int>, std::vector<double>> cache_;
};

}  // namespace

McReport mc_ensemble(const McConfig& config) {
  if (config.trials < 1) throw InvalidInput("trials must be at least 1");
  if (config.k < 1) throw InvalidInput("blocklength k must be at least 1");
  if (config.threads < 1) throw InvalidInput("threads must be at least 1");
  if (!(config.m >= 1.0) || !std::isfinite(config.m)) throw InvalidInput("M must be >= 1");
  const Region region = classify_region(config.params);
  if (region.primary != RegionLabel::D1 && region.primary != RegionLabel::D4) {
    throw InvalidInput("the simulated scheme needs a pair in D1 or D4, got " +
                       to_string(region.primary));
  }
  McMode mode = config.mode;
  if (mode == McMode::Auto) mode = config.m <= kLiteralMaxM ? McMode::Literal : McMode::OrderStatistic;
  if (mode == McMode::Literal && config.m != std::floor(config.m)) {
    throw InvalidInput("literal simulation needs an integer M");
  }

  const int workers = static_cast<int>(std::min<long long>(config.threads, config.trials));
  std::vector<long long> errors(static_cast<std::size_t>(workers), 0);
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    try {
      TrialRunner runner(config, mode);
      const long long begin = config.trials * w / workers;
      const long long end = config.trials * (w + 1) / workers;
      for (long long trial = begin; trial < end; ++trial) errors[w] += runner.error(trial);
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work, w);
    work(0);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  long long total = 0;
  for (long long e : errors) total += e;

  McReport rep;
  rep.trials = config.trials;
  rep.seed = config.seed;
  rep.mode = mode;
  rep.estimate = static_cast<double>(total) / static_cast<double>(config.trials);
  rep.std_error = std::sqrt(rep.estimate * (1.0 - rep.estimate) / static_cast<double>(config.trials));
  rep.theorem6_value = achievability_d1d4(config.params, config.k).epsilon(std::log(config.m));
  const double gap = std::abs(rep.estimate - rep.theorem6_value);
  rep.sigma_distance = rep.std_error > 0.0 ? gap / rep.std_error
                                           : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return rep;
}

nlohmann::json to_json(const McReport& r) {
  return {{"trials", r.trials},
          {"seed", r.seed},
          {"estimate", r.estimate},
          {"std_error", r.std_error},
          {"theorem6_value", r.theorem6_value},
          {"sigma_distance", std::isfinite(r.sigma_distance) ? nlohmann::json(r.sigma_distance)
                                                               : nlohmann::json(nullptr)}};
}

}  // namespace jdslc
