#include "jdslc/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/erf.hpp>

#include "jdslc/binomial.hpp"
#include "jdslc/error.hpp"

namespace jdslc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -kInf;

// Weight of each cell with exp(-M h) evaluated from log M + log h.
double survival(double log_m, double log_hazard) {
  if (log_hazard == kNegInf) return 1.0;
  if (log_hazard == kInf) return 0.0;
  return std::exp(-std::exp(log_m + log_hazard));
}

// log(-log(1 - A)) from log A.
double log_hazard_from_log_success(double log_a) {
  if (log_a == kNegInf) return kNegInf;
  if (log_a >= 0.0) return kInf;
  const double a = std::exp(log_a);
  if (a == 0.0) return log_a;  // -log(1 - A) = A to within A/2 relative
  return std::log(-std::log1p(-a));
}

// Erasure counts to keep: the smallest central range whose complement has
// mass at most `tolerance`. Returns {t_lo, t_hi, omitted mass}.
struct TRange {
  int lo = 0;
  int hi = 0;
  double omitted = 0.0;
};

TRange erasure_range(const binom::LogFactorials& lf, int k, double delta, double tolerance) {
  TRange r{0, k, 0.0};
  if (tolerance <= 0.0) return r;
  double left = 0.0;
  while (r.lo < k) {
    const double p = binom::pmf(lf, r.lo, k, delta);
    if (left + p > tolerance / 2) break;
    left += p;
    ++r.lo;
  }
  double right = 0.0;
  while (r.hi > r.lo) {
    const double p = binom::pmf(lf, r.hi, k, delta);
    if (right + p > tolerance / 2) break;
    right += p;
    --r.hi;
  }
  r.omitted = left + right;
  return r;
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("epsilon must lie in (0, 1)");
}

void check_k(int k) {
  if (k < 1) throw InvalidInput("blocklength k must be at least 1");
}

double log_of_count(double m) {
  if (!(m >= 1.0) || !std::isfinite(m)) throw InvalidInput("codebook size M must be >= 1");
  return std::log(m);
}

double erasure_mass(const TestChannel& ch) { return ch.edge_at(0, kErased) + ch.edge_at(1, kErased); }

}  // namespace

int budget_count(int k, double d) {
  if (!(d >= 0.0)) throw InvalidInput("distortion budget must be nonnegative");
  const double c = std::floor(static_cast<double>(k) * d + 1e-9);
  return static_cast<int>(std::min(c, static_cast<double>(k)));
}

// ------------------------------------------------------------------ gamma

GammaPolicy GammaPolicy::parse(const std::string& text) {
  if (text == "half-log-k") return {};
  if (text == "grid") return {Kind::Grid, 0.0};
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v >= 0.0) || !std::isfinite(v)) {
    throw InvalidInput("gamma must be 'half-log-k', 'grid' or a nonnegative number, got '" + text +
                       "'");
  }
  return {Kind::Fixed, v};
}

std::string GammaPolicy::describe() const {
  switch (kind) {
    case Kind::Fixed: {
      std::ostringstream os;
      os << value;
      return os.str();
    }
    case Kind::HalfLogK:
      return "half-log-k";
    case Kind::Grid:
      return "grid";
  }
  return "";
}

std::vector<double> GammaPolicy::gammas(int k) const {
  const double half = 0.5 * std::log(static_cast<double>(k));
  switch (kind) {
    case Kind::Fixed:
      return {value};
    case Kind::HalfLogK:
      return {half};
    case Kind::Grid: {
      constexpr int kPoints = 64;
      const double lo = 1e-3;
      const double hi = std::max(3.0 * std::log(static_cast<double>(k)), 1.0);
      std::vector<double> g;
      g.reserve(kPoints + 1);
      for (int i = 0; i < kPoints; ++i) {
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (kPoints - 1)));
      }
      g.push_back(half);
      return g;
    }
  }
  return {half};
}

// ------------------------------------------------------- tail distribution

TailDistribution::TailDistribution(std::vector<double> values, std::vector<double> masses) {
  if (values.size() != masses.size()) throw InvalidInput("atom values and masses differ in length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  values_.reserve(order.size());
  std::vector<double> sorted_mass;
  sorted_mass.reserve(order.size());
  for (std::size_t i : order) {
    values_.push_back(values[i]);
    sorted_mass.push_back(masses[i]);
  }
  tail_.assign(values_.size() + 1, 0.0);
  for (std::size_t i = values_.size(); i-- > 0;) tail_[i] = tail_[i + 1] + sorted_mass[i];
  tail_.pop_back();
}

double TailDistribution::tail(double threshold) const {
  const auto it = std::lower_bound(values_.begin(), values_.end(), threshold);
  if (it == values_.end()) return 0.0;
  return tail_[static_cast<std::size_t>(it - values_.begin())];
}

double TailDistribution::bound(double log_m, double gamma) const {
  return std::max(0.0, tail(gamma + log_m) - std::exp(-gamma));
}

double TailDistribution::bound(double log_m, const GammaPolicy& policy, int k) const {
  double best = 0.0;
  for (double g : policy.gammas(k)) best = std::max(best, bound(log_m, g));
  return best;
}

double TailDistribution::min_log_m(double epsilon, double gamma) const {
  const double target = epsilon + std::exp(-gamma);
  // tail_ is nonincreasing; find the last index whose tail exceeds target.
  const auto first_ok = std::partition_point(tail_.begin(), tail_.end(),
                                             [&](double m) { return m > target; });
  if (first_ok == tail_.begin()) return 0.0;
  const double w = values_[static_cast<std::size_t>(first_ok - tail_.begin()) - 1];
  return std::max(0.0, w - gamma);
}

double TailDistribution::min_log_m(double epsilon, const GammaPolicy& policy, int k) const {
  double best = 0.0;
  for (double g : policy.gammas(k)) best = std::max(best, min_log_m(epsilon, g));
  return best;
}

// ---------------------------------------------------------------- converse

ConverseStats converse_stats(const EfcfPoint& point) {
  ConverseStats s{point.j0, point.je, point.lambda_s, point.params.delta};
  if (!std::isfinite(s.j0) || !std::isfinite(s.je) || !std::isfinite(s.lambda_s)) {
    throw InvalidInput("converse statistic undefined: the pair sits where a multiplier diverges");
  }
  return s;
}

TailDistribution converse_distribution(const ConverseStats& stats, int k) {
  check_k(k);
  if (!(stats.delta > 0.0 && stats.delta < 1.0)) throw InvalidInput("delta must lie in (0, 1)");
  if (!(stats.lambda_s >= 0.0)) throw InvalidInput("lambda_s must be nonnegative");
  const binom::LogFactorials lf(k);
  std::vector<double> values;
  std::vector<double> masses;
  const std::size_t atoms = static_cast<std::size_t>(k + 1) * static_cast<std::size_t>(k + 2) / 2;
  values.reserve(atoms);
  masses.reserve(atoms);
  for (int t = 0; t <= k; ++t) {
    const double lt = binom::log_pmf(lf, t, k, stats.delta);
    const double base = (k - t) * stats.j0 + t * stats.je;
    for (int i = 0; i <= t; ++i) {
      const double mass = std::exp(lt + binom::log_pmf(lf, i, t, 0.5));
      if (mass == 0.0) continue;
      values.push_back(base + stats.lambda_s * (i - 0.5 * t));
      masses.push_back(mass);
    }
  }
  return TailDistribution(std::move(values), std::move(masses));
}

double converse_epsilon(const ConverseStats& stats, int k, double log_m, double gamma) {
  if (!(gamma >= 0.0)) throw InvalidInput("gamma must be nonnegative");
  return converse_distribution(stats, k).bound(log_m, gamma);
}

TailDistribution iid_sum_distribution(const std::vector<double>& values,
                                      const std::vector<double>& pmf, int k) {
  check_k(k);
  if (values.size() != pmf.size() || values.empty()) {
    throw InvalidInput("per-letter values and pmf must be nonempty and equally long");
  }
  constexpr double kMerge = 1e-12;
  using Atom = std::pair<double, double>;
  auto merge = [&](std::vector<Atom> atoms) {
    std::sort(atoms.begin(), atoms.end());
    std::vector<Atom> out;
    for (const Atom& a : atoms) {
      if (!out.empty() && a.first - out.back().first <= kMerge) {
        out.back().second += a.second;
      } else {
        out.push_back(a);
      }
    }
    if (out.size() > kMaxConvolutionAtoms) {
      std::ostringstream os;
      os << "sum distribution has " << out.size() << " distinct values (limit "
         << kMaxConvolutionAtoms << ")";
      throw ComputationError(os.str());
    }
    return out;
  };
  std::vector<Atom> letter;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (pmf[i] < 0.0 || !std::isfinite(values[i])) throw InvalidInput("invalid per-letter law");
    if (pmf[i] > 0.0) letter.emplace_back(values[i], pmf[i]);
  }
  letter = merge(letter);
  std::vector<Atom> sum = letter;
  for (int step = 1; step < k; ++step) {
    std::vector<Atom> next;
    next.reserve(sum.size() * letter.size());
    for (const Atom& a : sum) {
      for (const Atom& b : letter) next.emplace_back(a.first + b.first, a.second * b.second);
    }
    sum = merge(std::move(next));
  }
  std::vector<double> v;
  std::vector<double> m;
  for (const Atom& a : sum) {
    v.push_back(a.first);
    m.push_back(a.second);
  }
  return TailDistribution(std::move(v), std::move(m));
}

double converse_epsilon_lambda0(const std::vector<double>& jx_values, const std::vector<double>& px,
                                int k, double log_m, const GammaPolicy& policy) {
  return iid_sum_distribution(jx_values, px, k).bound(log_m, policy, k);
}

// ----------------------------------------------------------- achievability

AchievabilityTable::AchievabilityTable(std::vector<Cell> cells, double omitted_mass)
    : cells_(std::move(cells)), omitted_mass_(omitted_mass) {}

double AchievabilityTable::epsilon(double log_m) const {
  double acc = 0.0;
  for (const Cell& c : cells_) acc += c.weight * survival(log_m, c.log_hazard);
  return std::min(acc, 1.0);
}

double AchievabilityTable::floor() const {
  double acc = 0.0;
  for (const Cell& c : cells_) {
    if (c.log_hazard == kNegInf) acc += c.weight;
  }
  return acc;
}

AchievabilityTable achievability_d1d4(const EfcfParams& params, int k, double tail_tolerance) {
  check_k(k);
  const EfcfPoint pt = efcf_point(params);
  if (pt.region.primary != RegionLabel::D1 && pt.region.primary != RegionLabel::D4) {
    throw InvalidInput("this achievability bound needs a pair in D1 or D4, got " +
                       to_string(pt.region.primary));
  }
  const TestChannel& ch = pt.channel;
  // The regrouping below relies on the edge law living on (z, z) and (z, e).
  if (ch.edge_at(0, 1) > 1e-14 || ch.edge_at(1, 0) > 1e-14) {
    throw ComputationError("edge distribution does not have the expected support");
  }
  const double p_e = std::clamp(erasure_mass(ch), 0.0, 1.0);
  const double p_ne = 1.0 - p_e;
  const double delta = params.delta;
  const int bs = budget_count(k, params.pair.ds);
  const int bx = budget_count(k, params.pair.dx);

  const binom::LogFactorials lf(k);
  const TRange range = erasure_range(lf, k, delta, tail_tolerance);

  // log P[Bin(N, p_e) <= m] for N = 0..k - t_lo and m = 0..bx.
  const int n_max = k - range.lo;
  std::vector<std::vector<double>> cdf_e(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) cdf_e[n] = binom::log_cdf_row(lf, n, p_e, bx);

  std::vector<AchievabilityTable::Cell> cells;
  std::vector<double> log_pmf_ne;
  std::vector<double> buffer;
  std::vector<double> prefix;
  for (int t = range.lo; t <= range.hi; ++t) {
    const double log_wt = binom::log_pmf(lf, t, k, delta);
    if (log_wt == kNegInf) continue;
    const int n = k - t;
    log_pmf_ne.resize(static_cast<std::size_t>(t) + 1);
    for (int c = 0; c <= t; ++c) log_pmf_ne[c] = binom::log_pmf(lf, c, t, p_ne);

    // A codeword succeeds at erased-mismatch level i iff its unerased
    // semantic mismatches a1 satisfy a1 <= bs - i and all its data errors
    // fit in bx. Per unerased letter a semantic mismatch (prob 1/2) is
    // also a data error; otherwise a data error occurs when y = e.
    const int a_max = std::min({n, bs, bx});
    prefix.assign(static_cast<std::size_t>(std::max(a_max, -1) + 1), kNegInf);
    double running = kNegInf;
    for (int a1 = 0; a1 <= a_max; ++a1) {
      const int room = bx - a1;
      const int rest = n - a1;
      const int c_max = std::min(t, room);
      buffer.resize(static_cast<std::size_t>(c_max) + 1);
      for (int c = 0; c <= c_max; ++c) buffer[c] = log_pmf_ne[c] + cdf_e[rest][room - c];
      const double term = binom::log_pmf(lf, a1, n, 0.5) + binom::log_sum_exp(buffer);
      running = binom::log_add(running, term);
      prefix[a1] = running;
    }

    for (int i = 0; i <= t; ++i) {
      const double log_w = log_wt + binom::log_pmf(lf, i, t, 0.5);
      const double weight = std::exp(log_w);
      if (weight == 0.0) continue;
      const int cap = bs - i;
      const double log_a = cap < 0 || a_max < 0 ? kNegInf : prefix[std::min(cap, a_max)];
      cells.push_back({weight, log_hazard_from_log_success(log_a)});
    }
  }
  return AchievabilityTable(std::move(cells), range.omitted);
}

AchievabilityTable achievability_d2d3(const EfcfParams& params, int k, double tail_tolerance) {
  check_k(k);
  const Region region = classify_region(params);
  // Uniform binary codewords are a valid scheme anywhere; D1/D4 pairs have a
  // better one.
  if (region.primary == RegionLabel::D1 || region.primary == RegionLabel::D4) {
    throw InvalidInput("this achievability bound needs a pair in D2, D3 or D5, got " +
                       to_string(region.primary));
  }
  const double delta = params.delta;
  const int bs = budget_count(k, params.pair.ds);
  const int bx = budget_count(k, params.pair.dx);
  const binom::LogFactorials lf(k);
  const TRange range = erasure_range(lf, k, delta, tail_tolerance);

  std::vector<AchievabilityTable::Cell> cells;
  for (int t = range.lo; t <= range.hi; ++t) {
    const double log_wt = binom::log_pmf(lf, t, k, delta);
    if (log_wt == kNegInf) continue;
    const int n = k - t;
    const int upto = std::max(0, std::min(bs, bx - t));
    const std::vector<double> row = binom::log_cdf_row(lf, n, 0.5, upto);
    for (int i = 0; i <= t; ++i) {
      const double weight = std::exp(log_wt + binom::log_pmf(lf, i, t, 0.5));
      if (weight == 0.0) continue;
      const int c = std::min(bs - i, bx - t);
      const double log_a = c < 0 ? kNegInf : row[std::min(c, upto)];
      cells.push_back({weight, log_hazard_from_log_success(log_a)});
    }
  }
  return AchievabilityTable(std::move(cells), range.omitted);
}

AchievabilityTable achievability_table(const EfcfParams& params, int k, double tail_tolerance) {
  const Region region = classify_region(params);
  switch (region.primary) {
    case RegionLabel::D1:
    case RegionLabel::D4:
      return achievability_d1d4(params, k, tail_tolerance);
    case RegionLabel::D2:
    case RegionLabel::D3:
    case RegionLabel::D5:
      return achievability_d2d3(params, k, tail_tolerance);
  }
  throw InvalidInput("unknown region");
}

BoundValue achieve_epsilon_d1d4(const EfcfParams& params, int k, double m) {
  return achievability_d1d4(params, k).evaluate(log_of_count(m));
}

BoundValue achieve_epsilon_d2d3(const EfcfParams& params, int k, double m) {
  return achievability_d2d3(params, k).evaluate(log_of_count(m));
}

double achieve_epsilon_d1d4_nested(const EfcfParams& params, int k, double m) {
  check_k(k);
  log_of_count(m);
  const EfcfPoint pt = efcf_point(params);
  const double p_e = erasure_mass(pt.channel);
  const double delta = params.delta;
  const int bs = budget_count(k, params.pair.ds);
  const int bx = budget_count(k, params.pair.dx);
  const binom::LogFactorials lf(k);
  double eps = 0.0;
  for (int t = 0; t <= k; ++t) {
    const double wt = binom::pmf(lf, t, k, delta);
    for (int i = 0; i <= t; ++i) {
      double success = 0.0;
      for (int j = 0; j <= t; ++j) {
        const double pj = binom::pmf(lf, j, t, 1.0 - p_e);
        for (int r = 0; r <= k - t; ++r) {
          const double pr = binom::pmf(lf, r, k - t, p_e);
          for (int v = 0; v <= bx - j; ++v) {
            success += pj * pr * binom::pmf(lf, v - r, k - t - r, 0.5) *
                       binom::cdf(lf, bs - i - (v - r), r, 0.5);
          }
        }
      }
      eps += wt * binom::pmf(lf, i, t, 0.5) * std::pow(std::max(0.0, 1.0 - success), m);
    }
  }
  return eps;
}

double achieve_epsilon_d2d3_nested(const EfcfParams& params, int k, double m) {
  check_k(k);
  log_of_count(m);
  const int bs = budget_count(k, params.pair.ds);
  const int bx = budget_count(k, params.pair.dx);
  const binom::LogFactorials lf(k);
  double eps = 0.0;
  for (int t = 0; t <= k; ++t) {
    const double wt = binom::pmf(lf, t, k, params.delta);
    for (int i = 0; i <= t; ++i) {
      const double a = binom::cdf(lf, std::min(bs - i, bx - t), k - t, 0.5);
      eps += wt * binom::pmf(lf, i, t, 0.5) * std::pow(1.0 - a, m);
    }
  }
  return eps;
}

// --------------------------------------------------------------- inversion

RateResult invert_rate(const TailDistribution& converse, int k, double epsilon,
                       const GammaPolicy& policy) {
  check_k(k);
  check_epsilon(epsilon);
  RateResult r;
  r.log_m = converse.min_log_m(epsilon, policy, k);
  r.rate = r.log_m / k;
  // The infimum is not attained: the atom sitting at gamma + log_m still
  // counts there. Report the bound just above it.
  r.epsilon = converse.bound(r.log_m + 1e-12 * (1.0 + r.log_m), policy, k);
  return r;
}

RateResult invert_rate(const AchievabilityTable& table, int k, double epsilon) {
  check_k(k);
  check_epsilon(epsilon);
  const double floor = table.floor();
  if (floor > epsilon) {
    std::ostringstream os;
    os << "achievability impossible at k = " << k << ": the error floor " << floor
       << " (mass of erasure patterns no codeword can serve) exceeds epsilon = " << epsilon;
    throw ComputationError(os.str());
  }
  RateResult r;
  r.error_bound = table.error_bound();
  double last = table.epsilon(0.0);
  if (last <= epsilon) {
    r.epsilon = last;
    return r;
  }
  auto step_check = [&](double value, double log_m) {
    if (value > last + 1e-15) {
      std::ostringstream os;
      os << "achievability bound is not monotone in M near log M = " << log_m;
      throw ComputationError(os.str());
    }
    last = value;
  };

  // Integer search while M is exactly representable.
  constexpr double kExactLimit = 9007199254740992.0;  // 2^53
  double m_lo = 1.0;
  double m_hi = 2.0;
  bool found = false;
  while (m_hi <= kExactLimit) {
    const double v = table.epsilon(std::log(m_hi));
    step_check(v, std::log(m_hi));
    if (v <= epsilon) {
      found = true;
      break;
    }
    m_lo = m_hi;
    m_hi *= 2.0;
  }
  if (found) {
    while (m_hi - m_lo > 1.0) {
      const double mid = std::floor(0.5 * (m_lo + m_hi));
      if (table.epsilon(std::log(mid)) <= epsilon) {
        m_hi = mid;
      } else {
        m_lo = mid;
      }
    }
    r.log_m = std::log(m_hi);
  } else {
    const double cap = std::max(60.0, k * std::log(6.0) + 60.0);
    double lo = std::log(m_lo);
    double step = 1.0;
    double hi = lo + step;
    for (;;) {
      const double v = table.epsilon(hi);
      step_check(v, hi);
      if (v <= epsilon) break;
      lo = hi;
      step *= 2.0;
      hi = lo + step;
      if (lo > cap) {
        std::ostringstream os;
        os << "achievability bound stays above epsilon = " << epsilon << " up to log M = " << lo
           << " at k = " << k << " (floor " << floor << ")";
        throw ComputationError(os.str());
      }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (table.epsilon(mid) <= epsilon) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    r.log_m = hi;
  }
  r.rate = r.log_m / k;
  r.epsilon = table.epsilon(r.log_m);
  return r;
}

// ------------------------------------------------------------ second order

double qinv(double epsilon) {
  check_epsilon(epsilon);
  return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * epsilon);
}

double second_order_rate(double rate, double v_tilde, int k, double epsilon, double remainder) {
  check_k(k);
  if (!(v_tilde >= 0.0) || !std::isfinite(v_tilde)) {
    throw InvalidInput("dispersion must be finite and nonnegative");
  }
  return rate + std::sqrt(v_tilde / k) * qinv(epsilon) + remainder / k;
}

double second_order_rate(const EfcfPoint& point, int k, double epsilon, double remainder) {
  return second_order_rate(point.rate, point.v_tilde, k, epsilon, remainder);
}

double second_order_rate(const RdSolution& solution, int k, double epsilon, double remainder) {
  return second_order_rate(solution.rate, solution.dispersion_v_tilde, k, epsilon, remainder);
}

// ------------------------------------------------------------------- sweep

SweepCurve sweep(const EfcfParams& params, const SweepOptions& options) {
  check_epsilon(options.epsilon);
  if (options.k_list.empty()) throw InvalidInput("sweep needs at least one blocklength");
  for (int k : options.k_list) check_k(k);
  if (options.threads < 1) throw InvalidInput("thread count must be at least 1");

  const EfcfPoint pt = efcf_point(params);
  const ConverseStats stats = converse_stats(pt);

  SweepCurve curve;
  curve.params = params;
  curve.epsilon = options.epsilon;
  curve.records.resize(options.k_list.size());
  std::vector<std::exception_ptr> errors(options.k_list.size());

  auto work = [&](std::size_t idx) {
    const int k = options.k_list[idx];
    try {
      SweepRecord rec;
      rec.k = k;
      const RateResult conv =
          invert_rate(converse_distribution(stats, k), k, options.epsilon, options.gamma);
      const AchievabilityTable table = achievability_table(params, k, options.tail_tolerance);
      const RateResult ach = invert_rate(table, k, options.epsilon);
      rec.rate_converse = conv.rate;
      rec.rate_achievability = ach.rate;
      rec.rate_second_order = second_order_rate(pt, k, options.epsilon, options.remainder);
      rec.rate_asymptotic = pt.rate;
      rec.eps_error_bound = table.error_bound();
      if (rec.rate_converse > rec.rate_achievability + 1e-9) {
        std::ostringstream os;
        os << "converse rate " << rec.rate_converse << " exceeds achievability rate "
           << rec.rate_achievability;
        throw ComputationError(os.str());
      }
      curve.records[idx] = rec;
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  };

  const std::size_t n = options.k_list.size();
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(options.threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const InvalidInput& e) {
      throw InvalidInput("k = " + std::to_string(options.k_list[i]) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ComputationError("k = " + std::to_string(options.k_list[i]) + ": " + e.what());
    }
  }
  return curve;
}

std::string to_csv(const SweepCurve& curve, double unit_scale, int precision) {
  std::ostringstream os;
  os << "k,rate_converse,rate_achievability,rate_second_order,rate_asymptotic,eps_error_bound\n";
  os << std::setprecision(precision);
  for (const SweepRecord& r : curve.records) {
    os << r.k << ',' << r.rate_converse * unit_scale << ',' << r.rate_achievability * unit_scale
       << ',' << r.rate_second_order * unit_scale << ',' << r.rate_asymptotic * unit_scale << ','
       << r.eps_error_bound << '\n';
  }
  return os.str();
}

}  // namespace jdslc
