// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "jdslc/bounds.hpp"
#include "jdslc/efcf.hpp"
#include "jdslc/oracle.hpp"
#include "jdslc/rd_numeric.hpp"

using namespace jdslc;

namespace {

const EfcfParams kPairA{0.2, {0.176, 0.272}};
const EfcfParams kPairB{0.2, {0.224, 0.256}};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("criterion %d [%s] %s: %s\n", id, pass ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Strictly interior: the label survives a small move in every direction.
bool interior(const EfcfParams& p) {
  const Region r = classify_region(p);
  if (r.on_boundary()) return false;
  for (double a : {-2e-3, 2e-3}) {
    for (double b : {-2e-3, 2e-3}) {
      const EfcfParams q{p.delta, {p.pair.ds + a, p.pair.dx + b}};
      if (q.pair.ds < p.delta / 2 || q.pair.dx < 0) return false;
      const Region rq = classify_region(q);
      if (rq.on_boundary() || rq.primary != r.primary) return false;
    }
  }
  return true;
}

// Three interior points per region and delta, spread along a scan.
std::vector<EfcfParams> region_grid() {
  std::vector<EfcfParams> out;
  for (double delta : {0.05, 0.1, 0.2, 0.3}) {
    std::vector<std::vector<EfcfParams>> by_region(5);
    for (double ds = delta / 2 + 0.01; ds <= 0.75; ds += 0.02) {
      for (double dx = 0.01; dx <= 0.8; dx += 0.02) {
        const EfcfParams p{delta, {ds, dx}};
        if (interior(p)) by_region[static_cast<int>(classify_region(p).primary)].push_back(p);
      }
    }
    for (const auto& pts : by_region) {
      if (pts.empty()) continue;
      for (int i = 0; i < 3; ++i) out.push_back(pts[(pts.size() - 1) * (2 * i + 1) / 6]);
    }
  }
  return out;
}

struct SolvedPoint {
  EfcfParams params;
  RdSolution solution;
};

std::vector<SolvedPoint> criterion1() {
  Stopwatch clock;
  const std::vector<EfcfParams> grid = region_grid();
  std::vector<SolvedPoint> solved;
  double worst = 0.0;
  std::set<int> regions;
  std::string error;
  for (const EfcfParams& p : grid) {
    regions.insert(static_cast<int>(classify_region(p).primary));
    try {
      const SourceFile f = efcf_instance(p.delta);
      RdSolution sol = solve_rd(f.source, f.spec, p.pair);
      worst = std::max(worst, std::abs(sol.rate - efcf_rate(p)));
      solved.push_back({p, std::move(sol)});
    } catch (const std::exception& e) {
      error = e.what();
      worst = INFINITY;
    }
  }
  const double t = clock.seconds();
  const bool pass = grid.size() >= 50 && regions.size() == 5 && worst <= 1e-5 && t <= 60.0;
  report(1, "closed form vs numeric solver", pass,
         std::to_string(grid.size()) + " points over " + std::to_string(regions.size()) +
             " regions, max |diff| = " + fmt("%.3e", worst) + " nats (tol 1e-5), " + fmt("%.1f", t) +
             " s (limit 60)" + (error.empty() ? "" : ", error: " + error));
  return solved;
}

void criterion2() {
  const EfcfPoint pt = efcf_point(kPairA);
  struct Item {
    const char* name;
    double got;
    double want;
  };
  const std::vector<Item> items = {
      {"rate", pt.rate, 0.3085501},
      {"rate_bits", pt.rate / std::numbers::ln2, 0.445160},
      {"lambda_s", pt.lambda_s, 0.9473805},
      {"lambda_x", pt.lambda_x, 1.3121864},
      {"v", pt.v, 0.2178},
      {"v_tilde", pt.v_tilde, 0.2627},
  };
  bool pass = true;
  std::string detail;
  for (const Item& it : items) {
    const double diff = std::abs(it.got - it.want);
    pass = pass && diff <= 1e-4;
    detail += std::string(it.name) + " " + fmt("%.7f", it.got) + " (diff " + fmt("%.1e", diff) + "), ";
  }
  const double twin = std::abs(efcf_rate(kPairA) - efcf_rate(kPairB));
  pass = pass && twin <= 5e-4;
  detail += "|R(A) - R(B)| = " + fmt("%.3e", twin) + " (tol 5e-4)";
  report(2, "anchor values", pass, detail);
}

void criterion3(const std::vector<SolvedPoint>& solved) {
  double mean_gap = 0.0;
  double decomposition = 0.0;
  double support_dev = 0.0;
  double off_support_excess = 0.0;
  double gradient = 0.0;
  int gradient_letters = 0;
  for (const SolvedPoint& sp : solved) {
    const RdSolution& sol = sp.solution;
    const Dispersions d = dispersions(sol);
    mean_gap = std::max({mean_gap, std::abs(d.mean_tilted - sol.rate), std::abs(d.mean_tilted_noisy - sol.rate)});
    decomposition = std::max(
        decomposition, std::abs(d.v_tilde - d.v - sol.lambda_s * sol.lambda_s * d.semantic_conditional_variance));
    const Property1Report p1 = check_property1(sol, 1e-6);
    for (std::size_t i = 0; i < p1.values.size(); ++i) {
      if (p1.on_support[i]) {
        support_dev = std::max(support_dev, std::abs(p1.values[i] - 1.0));
      } else {
        off_support_excess = std::max(off_support_excess, p1.values[i] - 1.0);
      }
    }
    const GradientReport g = gradient_check(sol.source, sol.spec, sol.pair, 1e-4, 1e-3);
    for (const GradientLetter& l : g.letters) {
      if (!l.checked) continue;
      ++gradient_letters;
      gradient = std::max(gradient, l.error);
    }
  }
  const bool pass = !solved.empty() && mean_gap <= 1e-8 && decomposition <= 1e-10 && support_dev <= 1e-6 &&
                    off_support_excess <= 1e-6 && gradient <= 1e-3;
  report(3, "identity suite", pass,
         std::to_string(solved.size()) + " points: mean identity " + fmt("%.2e", mean_gap) +
             " (tol 1e-8), decomposition " + fmt("%.2e", decomposition) + " (tol 1e-10), support |m-1| " +
             fmt("%.2e", support_dev) + " (tol 1e-6), off-support excess " + fmt("%.2e", off_support_excess) +
             " (tol 1e-6), gradient " + fmt("%.2e", gradient) + " nats over " +
             std::to_string(gradient_letters) + " letters (tol 1e-3)");
}

void criterion4() {
  Stopwatch clock;
  double conv = 0.0;
  int conv_cases = 0;
  for (const EfcfParams& p : {kPairA, kPairB, EfcfParams{0.1, {0.08, 0.1}}, EfcfParams{0.3, {0.2, 0.3}}}) {
    const ConverseStats st = converse_stats(efcf_point(p));
    for (int k = 1; k <= 12; ++k) {
      for (double frac : {0.0, 0.3, 0.6}) {
        for (double gamma : {0.1, std::log(k) / 2 + 0.05, 1.5}) {
          const double lm = frac * k;
          conv = std::max(conv, std::abs(converse_epsilon(st, k, lm, gamma) - enumerate_converse_exact(st, k, lm, gamma)));
          ++conv_cases;
        }
      }
    }
  }
  double ach = 0.0;
  int ach_cases = 0;
  for (const EfcfParams& p : {kPairA, kPairB, EfcfParams{0.2, {0.3, 0.3}}}) {
    for (int k = 1; k <= 6; ++k) {
      for (double m : {1.0, 2.0, 8.0, 64.0}) {
        ach = std::max(ach, std::abs(achieve_epsilon_d1d4(p, k, m).value - enumerate_achieve_exact(p, k, m)));
        ++ach_cases;
      }
    }
  }
  for (const EfcfParams& p : {EfcfParams{0.2, {0.45, 0.5}}, EfcfParams{0.2, {0.3, 0.45}}}) {
    for (int k = 1; k <= 6; ++k) {
      for (double m : {1.0, 2.0, 8.0, 64.0}) {
        ach = std::max(ach, std::abs(achieve_epsilon_d2d3(p, k, m).value - enumerate_achieve_exact(p, k, m)));
        ++ach_cases;
      }
    }
  }
  double binary = 0.0;
  int binary_cases = 0;
  for (const EfcfParams& p : {EfcfParams{0.2, {0.45, 0.5}}, EfcfParams{0.2, {0.3, 0.45}}, EfcfParams{0.1, {0.3, 0.5}}}) {
    for (int k = 1; k <= 8; ++k) {
      for (double m : {1.0, 3.0, 20.0, 1000.0}) {
        binary = std::max(binary, std::abs(achieve_epsilon_d2d3(p, k, m).value - achieve_epsilon_d2d3_nested(p, k, m)));
        ++binary_cases;
      }
    }
  }
  const double t = clock.seconds();
  const bool pass = conv <= 1e-12 && ach <= 1e-10 && binary <= 1e-12 && t <= 120.0;
  report(4, "oracle equivalence", pass,
         "converse " + fmt("%.2e", conv) + " over " + std::to_string(conv_cases) + " cases (tol 1e-12), ensemble " +
             fmt("%.2e", ach) + " over " + std::to_string(ach_cases) + " cases (tol 1e-10), binary-codeword " +
             fmt("%.2e", binary) + " over " + std::to_string(binary_cases) + " cases (tol 1e-12), " +
             fmt("%.1f", t) + " s (limit 120)");
}

void criterion5() {
  Stopwatch clock;
  SweepOptions opt;
  opt.epsilon = 0.1;
  opt.k_list = {250, 500, 1000, 2000};
  opt.threads = 4;
  const SweepCurve curve = sweep(kPairA, opt);
  const EfcfPoint pt = efcf_point(kPairA);
  bool sandwich = true;
  std::string rows;
  for (const SweepRecord& r : curve.records) {
    sandwich = sandwich && r.rate_converse <= r.rate_achievability;
    rows += " k=" + std::to_string(r.k) + " [" + fmt("%.6f", r.rate_converse) + ", " +
            fmt("%.6f", r.rate_achievability) + "]";
  }
  const SweepRecord& first = curve.records.front();
  const SweepRecord& last = curve.records.back();
  const double gap_first = first.rate_achievability - first.rate_converse;
  const double gap_last = last.rate_achievability - last.rate_converse;
  const bool halved = gap_last < gap_first / 2;
  const double scaled = std::sqrt(static_cast<double>(last.k)) * (last.rate_achievability - pt.rate) / qinv(0.1);
  const double ratio = scaled / std::sqrt(pt.v_tilde);
  const bool dispersion = std::abs(ratio - 1.0) <= 0.15;
  const double t = clock.seconds();
  const bool pass = sandwich && halved && dispersion && t <= 600.0;
  report(5, "sandwich and convergence", pass,
         std::string("sandwich ") + (sandwich ? "ok" : "violated") + rows + "; gap(2000) = " + fmt("%.5f", gap_last) +
             " vs gap(250)/2 = " + fmt("%.5f", gap_first / 2) + (halved ? " ok" : " violated") +
             "; sqrt(k)(ach - R)/Qinv = " + fmt("%.4f", scaled) + " vs sqrt(v_tilde) = " +
             fmt("%.4f", std::sqrt(pt.v_tilde)) + ", ratio " + fmt("%.3f", ratio) + " (tol 15%)" +
             (dispersion ? " ok" : " exceeded") + "; " + fmt("%.1f", t) + " s (limit 600)");
}

void criterion6() {
  Stopwatch clock;
  const int k = 32;
  const RateResult inv = invert_rate(achievability_d1d4(kPairA, k), k, 0.1);
  McConfig cfg;
  cfg.trials = 100000;
  cfg.seed = 20240601;
  cfg.k = k;
  cfg.m = std::round(std::exp(inv.log_m));
  cfg.params = kPairA;
  cfg.mode = McMode::OrderStatistic;
  cfg.threads = 4;
  const McReport r = mc_ensemble(cfg);
  const double t = clock.seconds();
  const bool in_window = r.theorem6_value >= 0.08 && r.theorem6_value <= 0.12;
  const bool pass = in_window && r.sigma_distance <= 3.0 && t <= 120.0;
  report(6, "Monte-Carlo validation", pass,
         "M = " + fmt("%.6g", cfg.m) + ", exact " + fmt("%.6f", r.theorem6_value) + ", estimate " +
             fmt("%.5f", r.estimate) + " +- " + fmt("%.5f", r.std_error) + ", distance " +
             fmt("%.2f", r.sigma_distance) + " sigma (limit 3), " + fmt("%.1f", t) + " s (limit 120)");
}

void criterion7() {
  double worst_bound = 0.0;
  int evaluations = 0;
  for (int k = 100; k <= 2000; k += 50) {
    for (const EfcfParams& p : {kPairA, kPairB}) {
      worst_bound = std::max(worst_bound, achievability_table(p, k).error_bound());
      ++evaluations;
    }
  }
  bool covered = true;
  double worst_ratio = 0.0;
  int compared = 0;
  for (const EfcfParams& p : {kPairA, kPairB, EfcfParams{0.2, {0.45, 0.5}}}) {
    for (int k : {10, 50, 100, 150, 200}) {
      const AchievabilityTable cut = achievability_table(p, k);
      const AchievabilityTable full = achievability_table(p, k, 0.0);
      worst_bound = std::max(worst_bound, cut.error_bound());
      for (double frac : {0.1, 0.25, 0.35, 0.5, 0.8}) {
        const double diff = std::abs(cut.epsilon(frac * k) - full.epsilon(frac * k));
        covered = covered && diff < cut.error_bound();
        worst_ratio = std::max(worst_ratio, diff / cut.error_bound());
        ++compared;
      }
    }
  }
  const bool pass = worst_bound <= 1e-9 && covered;
  report(7, "numeric certification", pass,
         "largest reported bound " + fmt("%.2e", worst_bound) + " over " + std::to_string(evaluations) +
             "+ tables (tol 1e-9); truncated vs untruncated within bound in " + std::to_string(compared) +
             " comparisons, worst diff/bound " + fmt("%.2e", worst_ratio));
}

}  // namespace

int main() {
  auto guard = [](int id, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, "aborted", false, e.what());
    }
  };
  std::vector<SolvedPoint> solved;
  guard(1, [&] { solved = criterion1(); });
  guard(2, criterion2);
  guard(3, [&] { criterion3(solved); });
  guard(4, criterion4);
  guard(5, criterion5);
  guard(6, criterion6);
  guard(7, criterion7);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
