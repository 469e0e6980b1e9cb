#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "jdslc/bounds.hpp"
#include "jdslc/efcf.hpp"
#include "jdslc/error.hpp"
#include "jdslc/model_io.hpp"
#include "jdslc/oracle.hpp"
#include "jdslc/rd_numeric.hpp"

namespace jdslc::cli {

namespace {

using nlohmann::json;

struct Globals {
  std::string units = "bits";
  int precision = 10;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string gamma = "half-log-k";
  double remainder = 0.0;
  std::uint64_t seed = 1;
  std::string out;

  bool bits() const { return units == "bits"; }
  // Multiplies a nats quantity into the selected unit.
  double scale() const { return bits() ? 1.0 / std::numbers::ln2 : 1.0; }
  double to_nats(double v) const { return bits() ? v * std::numbers::ln2 : v; }

  std::string num(double v) const {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
  }
};

// Where a command writes its main output: the --out file when given.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw InvalidInput("cannot open output file '" + path + "'");
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }
  bool to_file() const { return file_.is_open(); }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct PairArgs {
  double delta = 0.2;
  double ds = 0.0;
  double dx = 0.0;
  EfcfParams params() const { return {delta, {ds, dx}}; }
};

void add_pair(CLI::App* cmd, PairArgs& p, bool with_delta = true) {
  if (with_delta) cmd->add_option("--delta", p.delta, "erasure probability, 0 < delta < 1/3")->capture_default_str();
  cmd->add_option("--ds", p.ds, "semantic distortion budget")->required();
  cmd->add_option("--dx", p.dx, "data distortion budget")->required();
}

// Rescales the nats-valued fields of a solution or point document.
void rescale(json& doc, const Globals& g, std::initializer_list<const char*> linear,
             std::initializer_list<const char*> squared) {
  if (!g.bits()) return;
  const double s = g.scale();
  auto scale_value = [](json& v, double f) {
    if (v.is_number()) v = v.get<double>() * f;
    if (v.is_array()) {
      for (auto& e : v) {
        if (e.is_number()) e = e.get<double>() * f;
      }
    }
  };
  for (const char* key : linear) {
    if (doc.contains(key)) scale_value(doc[key], s);
  }
  for (const char* key : squared) {
    if (doc.contains(key)) scale_value(doc[key], s * s);
  }
  doc["units"] = "bits";
}

std::vector<int> k_grid(int k_min, int k_max, int k_step) {
  if (k_step <= 0) throw InvalidInput("k-step must be positive");
  if (k_min < 1) throw InvalidInput("k-min must be at least 1");
  if (k_max < k_min) throw InvalidInput("k-max must be at least k-min");
  std::vector<int> ks;
  for (int k = k_min; k <= k_max; k += k_step) ks.push_back(k);
  return ks;
}

void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("epsilon must lie in (0, 1)");
}

void check_k(int k) {
  if (k < 1) throw InvalidInput("blocklength k must be at least 1");
}

struct CheckLine {
  std::string name;
  bool passed;
  double worst;
  double tolerance;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-blocklength bounds for joint semantic and data lossy compression", "jdslc"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.set_config("--config", "", "file of 'key = value' lines overriding defaults");
  app.add_option("--units", g.units, "bits or nats")
      ->check(CLI::IsMember({"bits", "nats"}))
      ->capture_default_str();
  app.add_option("--precision", g.precision, "significant digits, 4..17")
      ->check(CLI::Range(4, 17))
      ->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--gamma", g.gamma, "converse gamma: half-log-k, grid or a number")->capture_default_str();
  app.add_option("--remainder", g.remainder, "second-order remainder in nats")->capture_default_str();
  app.add_option("--seed", g.seed, "Monte-Carlo seed")->capture_default_str();
  app.add_option("--out", g.out, "write the main output to this file");

  std::function<void(std::ostream&)> action;

  // rate / region / point
  PairArgs rate_args;
  auto* rate = app.add_subcommand("rate", "closed-form rate of the erased fair coin flips source");
  add_pair(rate, rate_args);
  rate->callback([&] {
    action = [&](std::ostream& o) {
      o << g.num(efcf_rate(rate_args.params()) * g.scale()) << '\n';
    };
  });

  PairArgs region_args;
  auto* region = app.add_subcommand("region", "region label of a distortion pair");
  add_pair(region, region_args);
  region->callback([&] {
    action = [&](std::ostream& o) {
      const Region r = classify_region(region_args.params());
      o << to_string(r.primary);
      if (r.on_boundary()) o << " (boundary: " << r.members_string() << ')';
      o << '\n';
    };
  });

  PairArgs point_args;
  bool point_json = false;
  auto* point = app.add_subcommand("point", "rate, multipliers, tilted informations and dispersions");
  add_pair(point, point_args);
  point->add_flag("--json", point_json, "print JSON instead of key: value lines");
  point->callback([&] {
    action = [&](std::ostream& o) {
      const EfcfPoint pt = efcf_point(point_args.params());
      if (point_json) {
        json doc = to_json(pt);
        rescale(doc, g, {"rate", "lambda_s", "lambda_x", "j0", "je"}, {"v", "v_tilde"});
        o << doc.dump(2) << '\n';
        return;
      }
      const double s = g.scale();
      o << "delta: " << g.num(pt.params.delta) << '\n'
        << "ds: " << g.num(pt.params.pair.ds) << '\n'
        << "dx: " << g.num(pt.params.pair.dx) << '\n'
        << "region: " << to_string(pt.region.primary) << '\n'
        << "members: " << pt.region.members_string() << '\n'
        << "units: " << g.units << '\n'
        << "rate: " << g.num(pt.rate * s) << '\n'
        << "lambda_s: " << g.num(pt.lambda_s * s) << '\n'
        << "lambda_x: " << g.num(pt.lambda_x * s) << '\n'
        << "j0: " << g.num(pt.j0 * s) << '\n'
        << "je: " << g.num(pt.je * s) << '\n'
        << "v: " << g.num(pt.v * s * s) << '\n'
        << "v_tilde: " << g.num(pt.v_tilde * s * s) << '\n'
        << "p_y_erasure: " << g.num(pt.p_y_erasure) << '\n';
    };
  });

  // solve / validate
  std::string solve_source;
  PairArgs solve_args;
  double solve_tol = 1e-6;
  auto* solve = app.add_subcommand("solve", "numeric rate-distortion solution of a source file");
  solve->add_option("--source", solve_source, "source JSON file")->required();
  add_pair(solve, solve_args, false);
  solve->add_option("--tol", solve_tol, "optimality certificate tolerance")->capture_default_str();
  solve->callback([&] {
    action = [&](std::ostream& o) {
      const SourceFile f = load_source_file(solve_source);
      const RdSolution sol = solve_rd(f.source, f.spec, {solve_args.ds, solve_args.dx});
      json doc = to_json(sol);
      rescale(doc, g, {"rate", "lambda_s", "lambda_x", "tilted_surrogate"},
              {"dispersion_v", "dispersion_v_tilde"});
      doc["certificate"] = to_json(check_property1(sol, solve_tol), sol);
      o << doc.dump(2) << '\n';
    };
  });

  std::string validate_source;
  PairArgs validate_args;
  double validate_tol = 1e-6;
  double grad_step = 1e-4;
  double grad_tol = 1e-3;
  auto* validate_cmd = app.add_subcommand("validate", "check the optimality identities of a solved point");
  validate_cmd->add_option("--source", validate_source, "source JSON file")->required();
  add_pair(validate_cmd, validate_args, false);
  validate_cmd->add_option("--tol", validate_tol, "exponential moment tolerance")->capture_default_str();
  validate_cmd->add_option("--grad-step", grad_step, "finite-difference step")->capture_default_str();
  validate_cmd->add_option("--grad-tol", grad_tol, "finite-difference tolerance in nats")->capture_default_str();
  bool validate_failed = false;
  validate_cmd->callback([&] {
    action = [&](std::ostream& o) {
      const SourceFile f = load_source_file(validate_source);
      const DistortionPair pair{validate_args.ds, validate_args.dx};
      const RdSolution sol = solve_rd(f.source, f.spec, pair);
      const Dispersions d = dispersions(sol);
      const Property1Report p1 = check_property1(sol, validate_tol);
      const GradientReport grad = gradient_check(f.source, f.spec, pair, grad_step, grad_tol);
      const double mean_gap = std::max(std::abs(d.mean_tilted - sol.rate), std::abs(d.mean_tilted_noisy - sol.rate));
      const double decomposition =
          std::abs(d.v_tilde - d.v - sol.lambda_s * sol.lambda_s * d.semantic_conditional_variance);
      const std::vector<CheckLine> checks = {
          {"mean_tilted_equals_rate", mean_gap <= 1e-8, mean_gap, 1e-8},
          {"dispersion_decomposition", decomposition <= 1e-10, decomposition, 1e-10},
          {"exponential_moment", p1.worst_deviation <= validate_tol, p1.worst_deviation, validate_tol},
          {"lagrangian_gap", p1.minimization_gap <= 1e-8, p1.minimization_gap, 1e-8},
          {"rate_gradient", grad.passed, grad.max_error, grad_tol},
      };
      o << "rate: " << g.num(sol.rate * g.scale()) << ' ' << g.units << '\n';
      for (const CheckLine& c : checks) {
        o << (c.passed ? "PASS " : "FAIL ") << c.name << " worst=" << g.num(c.worst)
          << " tol=" << g.num(c.tolerance) << '\n';
        validate_failed = validate_failed || !c.passed;
      }
      for (const GradientLetter& l : grad.letters) {
        if (!l.checked) o << "note: gradient skipped for letter " << l.letter << ": " << l.skip_reason << '\n';
      }
    };
  });

  // converse / achieve / approx
  PairArgs conv_args;
  int conv_k = 0;
  std::optional<double> conv_log_m;
  std::optional<double> conv_eps;
  auto* converse = app.add_subcommand("converse", "converse bound on the error or on the rate");
  add_pair(converse, conv_args);
  converse->add_option("--k", conv_k, "blocklength")->required();
  auto* conv_lm = converse->add_option("--log-m", conv_log_m, "log codebook size in the selected units");
  converse->add_option("--eps", conv_eps, "target error; prints the minimal rate")->excludes(conv_lm);
  converse->callback([&] {
    action = [&](std::ostream& o) {
      check_k(conv_k);
      if (!conv_log_m && !conv_eps) throw InvalidInput("converse needs --log-m or --eps");
      const GammaPolicy policy = GammaPolicy::parse(g.gamma);
      const TailDistribution dist = converse_distribution(converse_stats(efcf_point(conv_args.params())), conv_k);
      if (conv_log_m) {
        const double lm = g.to_nats(*conv_log_m);
        if (lm < 0.0) throw InvalidInput("log M must be nonnegative");
        o << "gamma: " << policy.describe() << '\n'
          << "epsilon: " << g.num(dist.bound(lm, policy, conv_k)) << '\n';
        return;
      }
      check_epsilon(*conv_eps);
      const RateResult r = invert_rate(dist, conv_k, *conv_eps, policy);
      o << "gamma: " << policy.describe() << '\n'
        << "rate: " << g.num(r.rate * g.scale()) << '\n'
        << "log_m: " << g.num(r.log_m * g.scale()) << '\n'
        << "epsilon: " << g.num(r.epsilon) << '\n';
    };
  });

  PairArgs ach_args;
  int ach_k = 0;
  std::optional<double> ach_m;
  std::optional<double> ach_log_m;
  std::optional<double> ach_eps;
  auto* achieve = app.add_subcommand("achieve", "random-coding achievability bound");
  add_pair(achieve, ach_args);
  achieve->add_option("--k", ach_k, "blocklength")->required();
  auto* ach_m_opt = achieve->add_option("--m", ach_m, "codebook size");
  auto* ach_lm_opt = achieve->add_option("--log-m", ach_log_m, "log codebook size in the selected units")
                         ->excludes(ach_m_opt);
  achieve->add_option("--eps", ach_eps, "target error; prints the minimal rate")
      ->excludes(ach_m_opt)
      ->excludes(ach_lm_opt);
  achieve->callback([&] {
    action = [&](std::ostream& o) {
      check_k(ach_k);
      const AchievabilityTable table = achievability_table(ach_args.params(), ach_k);
      if (ach_eps) {
        check_epsilon(*ach_eps);
        const RateResult r = invert_rate(table, ach_k, *ach_eps);
        o << "rate: " << g.num(r.rate * g.scale()) << '\n'
          << "log_m: " << g.num(r.log_m * g.scale()) << '\n'
          << "epsilon: " << g.num(r.epsilon) << '\n'
          << "error_bound: " << g.num(r.error_bound) << '\n';
        return;
      }
      double lm = 0.0;
      if (ach_m) {
        if (!(*ach_m >= 1.0)) throw InvalidInput("M must be at least 1");
        lm = std::log(*ach_m);
      } else if (ach_log_m) {
        lm = g.to_nats(*ach_log_m);
        if (lm < 0.0) throw InvalidInput("log M must be nonnegative");
      } else {
        throw InvalidInput("achieve needs --m, --log-m or --eps");
      }
      const BoundValue v = table.evaluate(lm);
      o << "epsilon: " << g.num(v.value) << '\n' << "error_bound: " << g.num(v.error_bound) << '\n';
    };
  });

  PairArgs approx_args;
  int approx_k = 0;
  double approx_eps = 0.1;
  std::string approx_source;
  auto* approx = app.add_subcommand("approx", "second-order (Gaussian) rate approximation");
  add_pair(approx, approx_args);
  approx->add_option("--k", approx_k, "blocklength")->required();
  approx->add_option("--eps", approx_eps, "target error")->capture_default_str();
  approx->add_option("--source", approx_source, "solve this source file numerically instead");
  approx->callback([&] {
    action = [&](std::ostream& o) {
      check_k(approx_k);
      check_epsilon(approx_eps);
      double rate_value = 0.0;
      double v_tilde = 0.0;
      if (approx_source.empty()) {
        const EfcfPoint pt = efcf_point(approx_args.params());
        rate_value = pt.rate;
        v_tilde = pt.v_tilde;
      } else {
        const SourceFile f = load_source_file(approx_source);
        const RdSolution sol = solve_rd(f.source, f.spec, {approx_args.ds, approx_args.dx});
        rate_value = sol.rate;
        v_tilde = sol.dispersion_v_tilde;
      }
      const double s = g.scale();
      o << "rate_second_order: "
        << g.num(second_order_rate(rate_value, v_tilde, approx_k, approx_eps, g.remainder) * s) << '\n'
        << "rate_asymptotic: " << g.num(rate_value * s) << '\n'
        << "v_tilde: " << g.num(v_tilde * s * s) << '\n';
    };
  });

  // sweep
  PairArgs sweep_args;
  sweep_args.ds = 0.176;
  sweep_args.dx = 0.272;
  double sweep_eps = 0.1;
  int k_min = 100;
  int k_max = 2000;
  int k_step = 50;
  auto* sweep_cmd = app.add_subcommand("sweep", "rate-blocklength curves as CSV");
  sweep_cmd->add_option("--delta", sweep_args.delta, "erasure probability")->capture_default_str();
  sweep_cmd->add_option("--ds", sweep_args.ds, "semantic distortion budget")->capture_default_str();
  sweep_cmd->add_option("--dx", sweep_args.dx, "data distortion budget")->capture_default_str();
  sweep_cmd->add_option("--eps", sweep_eps, "target error")->capture_default_str();
  sweep_cmd->add_option("--k-min", k_min, "smallest blocklength")->capture_default_str();
  sweep_cmd->add_option("--k-max", k_max, "largest blocklength")->capture_default_str();
  sweep_cmd->add_option("--k-step", k_step, "blocklength step")->capture_default_str();
  bool sweep_summary_to_err = false;
  sweep_cmd->callback([&] {
    action = [&](std::ostream& o) {
      check_epsilon(sweep_eps);
      SweepOptions opt;
      opt.epsilon = sweep_eps;
      opt.k_list = k_grid(k_min, k_max, k_step);
      opt.gamma = GammaPolicy::parse(g.gamma);
      opt.remainder = g.remainder;
      opt.threads = g.threads;
      const SweepCurve curve = sweep(sweep_args.params(), opt);
      o << to_csv(curve, g.scale(), g.precision);
      double max_gap = -1.0;
      int max_gap_k = 0;
      for (const SweepRecord& r : curve.records) {
        const double gap = r.rate_achievability - r.rate_converse;
        if (gap > max_gap) {
          max_gap = gap;
          max_gap_k = r.k;
        }
      }
      const SweepRecord& last = curve.records.back();
      std::ostream& summary = sweep_summary_to_err ? err : out;
      summary << "max_gap: " << g.num(max_gap * g.scale()) << " at k = " << max_gap_k << '\n'
              << "gap_at_k_max: " << g.num((last.rate_achievability - last.rate_converse) * g.scale())
              << " at k = " << last.k << '\n'
              << "rate_asymptotic: " << g.num(last.rate_asymptotic * g.scale()) << ' ' << g.units << '\n';
    };
  });

  // mc
  PairArgs mc_args;
  int mc_k = 32;
  std::optional<double> mc_m;
  std::optional<double> mc_eps_target;
  long long mc_trials = 100000;
  std::string mc_mode = "auto";
  auto* mc = app.add_subcommand("mc", "Monte-Carlo simulation of the random-coding ensemble");
  add_pair(mc, mc_args);
  mc->add_option("--k", mc_k, "blocklength")->capture_default_str();
  auto* mc_m_opt = mc->add_option("--m", mc_m, "codebook size");
  mc->add_option("--eps-target", mc_eps_target, "choose the smallest M whose bound meets this error")
      ->excludes(mc_m_opt);
  mc->add_option("--trials", mc_trials, "number of trials")->capture_default_str();
  mc->add_option("--mode", mc_mode, "auto, literal or order")->capture_default_str();
  mc->callback([&] {
    action = [&](std::ostream& o) {
      check_k(mc_k);
      McConfig cfg;
      cfg.trials = mc_trials;
      cfg.seed = g.seed;
      cfg.k = mc_k;
      cfg.params = mc_args.params();
      cfg.mode = parse_mc_mode(mc_mode);
      cfg.threads = g.threads;
      if (mc_m) {
        cfg.m = *mc_m;
      } else if (mc_eps_target) {
        check_epsilon(*mc_eps_target);
        const RateResult r = invert_rate(achievability_d1d4(cfg.params, mc_k), mc_k, *mc_eps_target);
        cfg.m = std::round(std::exp(r.log_m));
      } else {
        throw InvalidInput("mc needs --m or --eps-target");
      }
      json doc = to_json(mc_ensemble(cfg));
      doc["m"] = cfg.m;
      doc["k"] = cfg.k;
      o << doc.dump() << '\n';
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    Sink sink(g.out, out);
    sweep_summary_to_err = !sink.to_file();
    action(sink.get());
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ComputationError& e) {
    err << "computation failed: " << e.what() << '\n';
    return kExitComputation;
  } catch (const std::exception& e) {
    err << "computation failed: " << e.what() << '\n';
    return kExitComputation;
  }
  if (validate_failed) {
    err << "validation failed\n";
    return kExitComputation;
  }
  return kExitOk;
}

}  // namespace jdslc::cli
