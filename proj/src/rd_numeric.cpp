#include "jdslc/rd_numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jdslc/error.hpp"

namespace jdslc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Mixed into warm-start edges so that no reconstruction pair starts at
// exactly zero mass (alternating updates can never revive such a pair).
constexpr double kWarmStartMix = 1e-8;

double log_sum_exp(const std::vector<double>& a) {
  double m = -kInf;
  for (double v : a) m = std::max(m, v);
  if (m == -kInf) return -kInf;
  double acc = 0.0;
  for (double v : a) acc += std::exp(v - m);
  return m + std::log(acc);
}

// Among minimizers at a zero multiplier, choose the unpenalized component as
// a deterministic function of the penalized one, minimizing its expected
// distortion. `fix_z` resolves Z given Y; otherwise Y given Z.
std::vector<double> resolve_ties(const JointSource& source, const DistortionSpec& spec,
                                 const std::vector<double>& conditional, bool fix_z) {
  const std::size_t nx = source.data_size();
  const std::size_t nz = spec.semantic_recon_size();
  const std::size_t ny = spec.data_recon_size();
  auto idx = [&](std::size_t x, std::size_t z, std::size_t y) { return (x * nz + z) * ny + y; };
  std::vector<double> out(conditional.size(), 0.0);
  if (fix_z) {
    for (std::size_t y = 0; y < ny; ++y) {
      std::size_t best = 0;
      double best_cost = kInf;
      for (std::size_t z = 0; z < nz; ++z) {
        double cost = 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
          if (!source.observed(x)) continue;
          double py = 0.0;
          for (std::size_t zz = 0; zz < nz; ++zz) py += conditional[idx(x, zz, y)];
          cost += source.data_marginal(x) * py * spec.surrogate_ds(x, z);
        }
        if (cost < best_cost) {
          best_cost = cost;
          best = z;
        }
      }
      for (std::size_t x = 0; x < nx; ++x) {
        double py = 0.0;
        for (std::size_t zz = 0; zz < nz; ++zz) py += conditional[idx(x, zz, y)];
        out[idx(x, best, y)] = py;
      }
    }
  } else {
    for (std::size_t z = 0; z < nz; ++z) {
      std::size_t best = 0;
      double best_cost = kInf;
      for (std::size_t y = 0; y < ny; ++y) {
        double cost = 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
          if (!source.observed(x)) continue;
          double pz = 0.0;
          for (std::size_t yy = 0; yy < ny; ++yy) pz += conditional[idx(x, z, yy)];
          cost += source.data_marginal(x) * pz * spec.dx_table(x, y);
        }
        if (cost < best_cost) {
          best_cost = cost;
          best = y;
        }
      }
      for (std::size_t x = 0; x < nx; ++x) {
        double pz = 0.0;
        for (std::size_t yy = 0; yy < ny; ++yy) pz += conditional[idx(x, z, yy)];
        out[idx(x, z, best)] = pz;
      }
    }
  }
  return out;
}

InnerSolution run_alternating(const JointSource& source, const DistortionSpec& spec, double s1,
                              double s2, const BaOptions& options,
                              const std::vector<double>* warm_edge) {
  if (!(s1 >= 0.0) || !(s2 >= 0.0) || !std::isfinite(s1) || !std::isfinite(s2)) {
    throw InvalidInput("multipliers must be finite and nonnegative");
  }
  const std::size_t nx = source.data_size();
  const std::size_t nz = spec.semantic_recon_size();
  const std::size_t ny = spec.data_recon_size();
  const std::size_t nk = nz * ny;

  std::vector<std::size_t> letters;
  for (std::size_t x = 0; x < nx; ++x) {
    if (source.observed(x)) letters.push_back(x);
  }
  const std::size_t n = letters.size();

  // Row-shifted Boltzmann weights exp(-(s.d - min_k s.d)).
  std::vector<double> weight(n * nk);
  std::vector<double> shift(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = letters[i];
    double lo = kInf;
    for (std::size_t z = 0; z < nz; ++z) {
      for (std::size_t y = 0; y < ny; ++y) {
        lo = std::min(lo, s1 * spec.surrogate_ds(x, z) + s2 * spec.dx_table(x, y));
      }
    }
    shift[i] = lo;
    for (std::size_t z = 0; z < nz; ++z) {
      for (std::size_t y = 0; y < ny; ++y) {
        const double d = s1 * spec.surrogate_ds(x, z) + s2 * spec.dx_table(x, y);
        weight[i * nk + z * ny + y] = std::exp(-(d - lo));
      }
    }
  }

  std::vector<double> q(nk, 1.0 / static_cast<double>(nk));
  if (warm_edge != nullptr && warm_edge->size() == nk) {
    for (std::size_t k = 0; k < nk; ++k) {
      q[k] = (1.0 - kWarmStartMix) * (*warm_edge)[k] + kWarmStartMix / static_cast<double>(nk);
    }
  }

  InnerSolution out;
  std::vector<double> next(nk);
  std::vector<double> norm(n);
  double previous = kInf;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double objective = 0.0;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* w = &weight[i * nk];
      double zsum = 0.0;
      for (std::size_t k = 0; k < nk; ++k) zsum += q[k] * w[k];
      norm[i] = zsum;
      const double px = source.data_marginal(letters[i]);
      objective += px * (shift[i] - std::log(zsum));
      const double scale = px / zsum;
      for (std::size_t k = 0; k < nk; ++k) next[k] += scale * q[k] * w[k];
    }
    double residual = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
      if (q[k] > kSupportThreshold) residual = std::max(residual, std::abs(next[k] / q[k] - 1.0));
    }
    const double change = previous - objective;
    if (std::isfinite(previous)) {
      out.max_objective_increase = std::max(out.max_objective_increase, -change);
    }
    out.sweeps = sweep;
    out.last_change = std::isfinite(change) ? change : kInf;
    out.fixed_point_residual = residual;
    previous = objective;
    if (sweep > 1 && std::abs(change) < options.objective_tol &&
        residual < options.fixed_point_tol) {
      out.converged = true;
      break;
    }
    if (sweep == options.max_sweeps) break;
    q.swap(next);
  }

  // Channel from the last edge iterate.
  std::vector<double> conditional(nx * nk, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = letters[i];
    const double* w = &weight[i * nk];
    for (std::size_t k = 0; k < nk; ++k) conditional[x * nk + k] = q[k] * w[k] / norm[i];
  }
  if (s1 == 0.0) conditional = resolve_ties(source, spec, conditional, /*fix_z=*/true);
  if (s2 == 0.0) conditional = resolve_ties(source, spec, conditional, /*fix_z=*/false);

  out.raw_edge = q;
  out.channel = TestChannel::from_conditional(source, nz, ny, std::move(conditional));
  const DistortionPair d = expected_distortions(source, spec, out.channel);
  out.achieved_ds = d.ds;
  out.achieved_dx = d.dx;
  out.objective = mutual_information(source, out.channel) + s1 * d.ds + s2 * d.dx;
  return out;
}

void finalize(RdSolution& sol) {
  sol.tilted_surrogate.assign(sol.source.data_size(), kNaN);
  for (std::size_t x = 0; x < sol.source.data_size(); ++x) {
    if (sol.source.observed(x)) sol.tilted_surrogate[x] = tilted_surrogate(sol, x);
  }
  const Dispersions disp = dispersions(sol);
  sol.dispersion_v = disp.v;
  sol.dispersion_v_tilde = disp.v_tilde;
  sol.diagnostics.mutual_information = mutual_information(sol.source, sol.channel);
  sol.diagnostics.channel_row_error = channel_row_error(sol.source, sol.channel);
  sol.diagnostics.ds_residual = sol.achieved_ds - sol.pair.ds;
  sol.diagnostics.dx_residual = sol.achieved_dx - sol.pair.dx;
}

// Root of a nonincreasing function by false position with the Illinois
// modification. Requires f(lo) > 0 >= f(hi). Returns the last point at which
// f <= tol in absolute value, or the feasible end of the final bracket.
template <typename Eval>
double falling_root(Eval&& f, double lo, double f_lo, double hi, double f_hi, double tol,
                    int max_iter = 200) {
  int side = 0;
  double feasible = hi;
  for (int it = 0; it < max_iter; ++it) {
    double s = (f_lo * hi - f_hi * lo) / (f_lo - f_hi);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    const double g = f(s);
    if (std::abs(g) <= tol) return s;
    if (g > 0.0) {
      lo = s;
      f_lo = g;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    } else {
      hi = s;
      f_hi = g;
      feasible = s;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    }
    if (hi - lo <= 1e-15 * (1.0 + hi)) break;
  }
  return feasible;
}

}  // namespace

TestChannel TestChannel::from_conditional(const JointSource& source,
                                          std::size_t semantic_recon_size,
                                          std::size_t data_recon_size,
                                          std::vector<double> conditional) {
  TestChannel ch;
  ch.data_size = source.data_size();
  ch.semantic_recon_size = semantic_recon_size;
  ch.data_recon_size = data_recon_size;
  const std::size_t nk = semantic_recon_size * data_recon_size;
  if (conditional.size() != ch.data_size * nk) {
    throw InvalidInput("channel table has the wrong size");
  }
  ch.conditional = std::move(conditional);
  ch.edge.assign(nk, 0.0);
  for (std::size_t x = 0; x < ch.data_size; ++x) {
    if (!source.observed(x)) continue;
    const double px = source.data_marginal(x);
    for (std::size_t k = 0; k < nk; ++k) ch.edge[k] += px * ch.conditional[x * nk + k];
  }
  return ch;
}

double channel_row_error(const JointSource& source, const TestChannel& channel) {
  const std::size_t nk = channel.semantic_recon_size * channel.data_recon_size;
  double worst = 0.0;
  for (std::size_t x = 0; x < channel.data_size; ++x) {
    if (!source.observed(x)) continue;
    double row = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
      const double p = channel.conditional[x * nk + k];
      if (p < 0.0) return kInf;
      row += p;
    }
    worst = std::max(worst, std::abs(row - 1.0));
  }
  return worst;
}

DistortionPair expected_distortions(const JointSource& source, const DistortionSpec& spec,
                                    const TestChannel& channel) {
  DistortionPair d;
  for (std::size_t x = 0; x < source.data_size(); ++x) {
    if (!source.observed(x)) continue;
    const double px = source.data_marginal(x);
    for (std::size_t z = 0; z < channel.semantic_recon_size; ++z) {
      for (std::size_t y = 0; y < channel.data_recon_size; ++y) {
        const double p = px * channel.at(x, z, y);
        d.ds += p * spec.surrogate_ds(x, z);
        d.dx += p * spec.dx_table(x, y);
      }
    }
  }
  return d;
}

double mutual_information(const JointSource& source, const TestChannel& channel) {
  double info = 0.0;
  for (std::size_t x = 0; x < source.data_size(); ++x) {
    if (!source.observed(x)) continue;
    const double px = source.data_marginal(x);
    for (std::size_t z = 0; z < channel.semantic_recon_size; ++z) {
      for (std::size_t y = 0; y < channel.data_recon_size; ++y) {
        const double p = channel.at(x, z, y);
        if (p > 0.0) info += px * p * std::log(p / channel.edge_at(z, y));
      }
    }
  }
  return std::max(info, 0.0);
}

InnerSolution ba_inner_min(const JointSource& source, const DistortionSpec& spec, double s1,
                           double s2, const BaOptions& options,
                           const std::vector<double>* warm_edge) {
  require_valid(source);
  InnerSolution sol = run_alternating(source, spec, s1, s2, options, warm_edge);
  if (!sol.converged) {
    std::ostringstream os;
    os << "alternating minimization did not converge in " << sol.sweeps
       << " sweeps (last objective change " << sol.last_change << ", fixed-point residual "
       << sol.fixed_point_residual << ")";
    throw ComputationError(os.str());
  }
  return sol;
}

RdSolution solve_rd(const JointSource& source, const DistortionSpec& spec,
                    const DistortionPair& pair, const SolveOptions& options) {
  require_valid(source);
  const DistortionPair bounds = admissible_bounds(source, spec);
  if (!is_admissible(pair, bounds)) {
    std::ostringstream os;
    os.precision(12);
    os << "distortion pair (" << pair.ds << ", " << pair.dx
       << ") is not admissible; need ds >= " << bounds.ds << " and dx >= " << bounds.dx;
    throw InvalidInput(os.str());
  }
  const bool on_boundary = pair.ds < bounds.ds + 1e-9 || pair.dx < bounds.dx + 1e-9;
  const double tol = on_boundary ? options.boundary_distortion_tol : options.distortion_tol;

  RdSolution sol;
  sol.source = source;
  sol.spec = spec;
  sol.pair = pair;

  BaOptions search_ba = options.ba;
  search_ba.max_sweeps = std::min(options.ba.max_sweeps, options.search_max_sweeps);

  int solves = 0;
  std::vector<double> warm;
  auto evaluate = [&](double s1, double s2, const BaOptions& ba) {
    ++solves;
    InnerSolution r = run_alternating(source, spec, s1, s2, ba, warm.empty() ? nullptr : &warm);
    warm = r.raw_edge;
    return r;
  };

  double s1 = 0.0;
  double s2 = 0.0;
  const DistortionPair zero = zero_rate_thresholds(source, spec);
  if (pair.ds >= zero.ds - kMassTolerance && pair.dx >= zero.dx - kMassTolerance) {
    sol.diagnostics.zero_rate = true;
  } else {
    // s2*(s1): the data multiplier making the data constraint tight.
    auto data_multiplier = [&](double fixed_s1) {
      InnerSolution r = evaluate(fixed_s1, 0.0, search_ba);
      if (r.achieved_dx <= pair.dx + tol) return 0.0;
      double lo = 0.0;
      double f_lo = r.achieved_dx - pair.dx;
      double hi = 1.0;
      double f_hi = evaluate(fixed_s1, hi, search_ba).achieved_dx - pair.dx;
      while (f_hi > tol) {
        lo = hi;
        f_lo = f_hi;
        hi *= 4.0;
        if (hi > options.max_multiplier) {
          std::ostringstream os;
          os << "data multiplier search failed to bracket: scanned s2 up to " << lo
             << " at s1 = " << fixed_s1 << ", residual " << f_lo;
          throw ComputationError(os.str());
        }
        f_hi = evaluate(fixed_s1, hi, search_ba).achieved_dx - pair.dx;
      }
      if (f_hi >= -tol) return hi;
      return falling_root(
          [&](double s) { return evaluate(fixed_s1, s, search_ba).achieved_dx - pair.dx; }, lo,
          f_lo, hi, f_hi, tol);
    };
    auto semantic_residual = [&](double fixed_s1) {
      s2 = data_multiplier(fixed_s1);
      return evaluate(fixed_s1, s2, search_ba).achieved_ds - pair.ds;
    };

    const double g0 = semantic_residual(0.0);
    if (g0 > tol) {
      double lo = 0.0;
      double f_lo = g0;
      double hi = 1.0;
      double f_hi = semantic_residual(hi);
      while (f_hi > tol) {
        lo = hi;
        f_lo = f_hi;
        hi *= 4.0;
        if (hi > options.max_multiplier) {
          std::ostringstream os;
          os << "semantic multiplier search failed to bracket: scanned s1 in {0, 1, 4, ..., " << lo
             << "}, residual " << f_lo;
          throw ComputationError(os.str());
        }
        f_hi = semantic_residual(hi);
      }
      s1 = f_hi >= -tol ? hi : falling_root(semantic_residual, lo, f_lo, hi, f_hi, tol);
      s2 = data_multiplier(s1);
    }
  }

  InnerSolution final_inner = evaluate(s1, s2, options.ba);
  if (!final_inner.converged) {
    std::ostringstream os;
    os << "alternating minimization did not converge at multipliers (" << s1 << ", " << s2
       << "): last objective change " << final_inner.last_change << ", fixed-point residual "
       << final_inner.fixed_point_residual;
    throw ComputationError(os.str());
  }

  sol.lambda_s = s1;
  sol.lambda_x = s2;
  sol.channel = std::move(final_inner.channel);
  sol.achieved_ds = final_inner.achieved_ds;
  sol.achieved_dx = final_inner.achieved_dx;
  sol.rate = std::max(0.0, final_inner.objective - s1 * pair.ds - s2 * pair.dx);
  sol.diagnostics.inner_solves = solves;
  sol.diagnostics.sweeps = final_inner.sweeps;
  sol.diagnostics.last_change = final_inner.last_change;
  sol.diagnostics.fixed_point_residual = final_inner.fixed_point_residual;
  sol.diagnostics.ds_active = s1 > 0.0;
  sol.diagnostics.dx_active = s2 > 0.0;
  finalize(sol);
  return sol;
}

double tilted_surrogate(const RdSolution& sol, std::size_t x) {
  if (x >= sol.source.data_size()) throw InvalidInput("data letter out of range");
  if (!sol.source.observed(x)) return kNaN;
  const std::size_t nz = sol.channel.semantic_recon_size;
  const std::size_t ny = sol.channel.data_recon_size;
  std::vector<double> terms;
  terms.reserve(nz * ny);
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double q = sol.channel.edge_at(z, y);
      if (q <= 0.0) continue;
      terms.push_back(std::log(q) + sol.lambda_s * (sol.pair.ds - sol.spec.surrogate_ds(x, z)) +
                      sol.lambda_x * (sol.pair.dx - sol.spec.dx_table(x, y)));
    }
  }
  return -log_sum_exp(terms);
}

namespace {

double noisy_tilted_unchecked(const RdSolution& sol, std::size_t s, std::size_t x, std::size_t z,
                              std::size_t y) {
  const double p = sol.channel.at(x, z, y);
  const double q = sol.channel.edge_at(z, y);
  const double density = p > 0.0 ? std::log(p / q) : -kInf;
  return density + sol.lambda_s * (sol.spec.ds_table(s, z) - sol.pair.ds) +
         sol.lambda_x * (sol.spec.dx_table(x, y) - sol.pair.dx);
}

}  // namespace

double tilted_noisy(const RdSolution& sol, std::size_t s, std::size_t x, std::size_t z,
                    std::size_t y) {
  if (s >= sol.source.semantic_size() || x >= sol.source.data_size() ||
      z >= sol.channel.semantic_recon_size || y >= sol.channel.data_recon_size) {
    throw InvalidInput("letter index out of range");
  }
  if (sol.channel.edge_at(z, y) <= kSupportThreshold) {
    throw InvalidInput("(z, y) is outside the edge support; information density undefined");
  }
  if (!sol.source.observed(x)) throw InvalidInput("data letter has zero probability");
  return noisy_tilted_unchecked(sol, s, x, z, y);
}

Dispersions dispersions(const RdSolution& sol) {
  Dispersions d;
  const JointSource& src = sol.source;
  std::vector<double> j(src.data_size(), 0.0);
  for (std::size_t x = 0; x < src.data_size(); ++x) {
    if (!src.observed(x)) continue;
    j[x] = tilted_surrogate(sol, x);
    d.mean_tilted += src.data_marginal(x) * j[x];
  }
  for (std::size_t x = 0; x < src.data_size(); ++x) {
    if (!src.observed(x)) continue;
    const double e = j[x] - d.mean_tilted;
    d.v += src.data_marginal(x) * e * e;
  }

  const std::size_t nz = sol.channel.semantic_recon_size;
  const std::size_t ny = sol.channel.data_recon_size;
  // Two passes over the finite joint law P_X P_{ZY|X} P_{S|X}.
  for (int pass = 0; pass < 2; ++pass) {
    double acc = 0.0;
    for (std::size_t x = 0; x < src.data_size(); ++x) {
      if (!src.observed(x)) continue;
      for (std::size_t s = 0; s < src.semantic_size(); ++s) {
        const double psx = src.joint(s, x);
        if (psx <= 0.0) continue;
        for (std::size_t z = 0; z < nz; ++z) {
          for (std::size_t y = 0; y < ny; ++y) {
            const double p = sol.channel.at(x, z, y);
            if (p <= 0.0 || sol.channel.edge_at(z, y) <= 0.0) continue;
            const double t = noisy_tilted_unchecked(sol, s, x, z, y);
            if (pass == 0) {
              acc += psx * p * t;
            } else {
              const double e = t - d.mean_tilted_noisy;
              acc += psx * p * e * e;
            }
          }
        }
      }
    }
    if (pass == 0) {
      d.mean_tilted_noisy = acc;
    } else {
      d.v_tilde = acc;
    }
  }

  for (std::size_t x = 0; x < src.data_size(); ++x) {
    if (!src.observed(x)) continue;
    for (std::size_t z = 0; z < nz; ++z) {
      double pz = 0.0;
      for (std::size_t y = 0; y < ny; ++y) pz += sol.channel.at(x, z, y);
      if (pz <= 0.0) continue;
      double second = 0.0;
      for (std::size_t s = 0; s < src.semantic_size(); ++s) {
        const double v = sol.spec.ds_table(s, z);
        second += src.conditional(s, x) * v * v;
      }
      const double mean = sol.spec.surrogate_ds(x, z);
      d.semantic_conditional_variance +=
          src.data_marginal(x) * pz * std::max(0.0, second - mean * mean);
    }
  }
  return d;
}

Property1Report check_property1(const RdSolution& sol, double tol) {
  Property1Report rep;
  const JointSource& src = sol.source;
  const std::size_t nz = sol.channel.semantic_recon_size;
  const std::size_t ny = sol.channel.data_recon_size;
  rep.values.assign(nz * ny, 0.0);
  rep.on_support.assign(nz * ny, false);
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      double v = 0.0;
      for (std::size_t x = 0; x < src.data_size(); ++x) {
        if (!src.observed(x)) continue;
        const double j = sol.tilted_surrogate[x];
        v += src.data_marginal(x) *
             std::exp(sol.lambda_s * (sol.pair.ds - sol.spec.surrogate_ds(x, z)) +
                      sol.lambda_x * (sol.pair.dx - sol.spec.dx_table(x, y)) + j);
      }
      const std::size_t k = z * ny + y;
      rep.values[k] = v;
      rep.on_support[k] = sol.channel.edge_at(z, y) > kCertifiedSupport;
      const double deviation = rep.on_support[k] ? std::abs(v - 1.0) : std::max(0.0, v - 1.0);
      if (deviation > rep.worst_deviation) {
        rep.worst_deviation = deviation;
        rep.worst_z = z;
        rep.worst_y = y;
      }
    }
  }
  // Inner minimum at the solution multipliers, solved from the uniform start.
  BaOptions ba;
  const InnerSolution fresh =
      run_alternating(src, sol.spec, sol.lambda_s, sol.lambda_x, ba, nullptr);
  const double dual =
      fresh.objective - sol.lambda_s * sol.pair.ds - sol.lambda_x * sol.pair.dx;
  rep.minimization_gap = std::abs(std::max(0.0, dual) - sol.rate);
  rep.passed = rep.worst_deviation <= tol && rep.minimization_gap <= tol;
  return rep;
}

GradientReport gradient_check(const JointSource& source, const DistortionSpec& spec,
                              const DistortionPair& pair, double step, double tol,
                              const SolveOptions& options) {
  if (!(step > 0.0)) throw InvalidInput("finite-difference step must be positive");
  const RdSolution base = solve_rd(source, spec, pair, options);
  const bool base_s = base.lambda_s > 0.0;
  const bool base_x = base.lambda_x > 0.0;

  GradientReport rep;
  for (std::size_t a = 0; a < source.data_size(); ++a) {
    GradientLetter g;
    g.letter = a;
    if (!source.observed(a)) {
      g.skip_reason = "letter has zero probability";
      rep.letters.push_back(g);
      continue;
    }
    double rates[2] = {0.0, 0.0};
    bool ok = true;
    for (int side = 0; side < 2; ++side) {
      std::vector<double> mass = source.data_marginal();
      mass[a] += side == 0 ? step : -step;
      if (mass[a] <= 0.0) {
        g.skip_reason = "perturbation leaves the probability simplex";
        ok = false;
        break;
      }
      double total = 0.0;
      for (double m : mass) total += m;
      for (double& m : mass) m /= total;
      const JointSource perturbed = source.with_data_marginal(mass);
      const DistortionSpec pspec = make_distortion_spec(
          perturbed, spec.ds_table, spec.dx_table, spec.semantic_recon_alphabet,
          spec.data_recon_alphabet);
      if (!is_admissible(pair, admissible_bounds(perturbed, pspec))) {
        g.skip_reason = "perturbed instance makes the pair inadmissible";
        ok = false;
        break;
      }
      const RdSolution r = solve_rd(perturbed, pspec, pair, options);
      if ((r.lambda_s > 0.0) != base_s || (r.lambda_x > 0.0) != base_x) {
        g.skip_reason = "perturbation crosses a region boundary (active constraints change)";
        ok = false;
        break;
      }
      rates[side] = r.rate;
    }
    if (ok) {
      g.checked = true;
      g.finite_difference = (rates[0] - rates[1]) / (2.0 * step);
      g.predicted = base.tilted_surrogate[a] - base.rate;
      g.error = std::abs(g.finite_difference - g.predicted);
      rep.max_error = std::max(rep.max_error, g.error);
      if (g.error > tol) rep.passed = false;
    }
    rep.letters.push_back(g);
  }
  return rep;
}

nlohmann::json to_json(const RdSolution& sol) {
  using nlohmann::json;
  const auto& sx = sol.spec.semantic_recon_alphabet;
  const auto& dy = sol.spec.data_recon_alphabet;
  json tilted = json::object();
  for (std::size_t x = 0; x < sol.source.data_size(); ++x) {
    const double v = sol.tilted_surrogate[x];
    tilted[sol.source.data_alphabet()[x]] = std::isfinite(v) ? json(v) : json(nullptr);
  }
  json conditional = json::object();
  for (std::size_t x = 0; x < sol.source.data_size(); ++x) {
    json rows = json::array();
    for (std::size_t z = 0; z < sol.channel.semantic_recon_size; ++z) {
      json row = json::array();
      for (std::size_t y = 0; y < sol.channel.data_recon_size; ++y) row.push_back(sol.channel.at(x, z, y));
      rows.push_back(row);
    }
    conditional[sol.source.data_alphabet()[x]] = rows;
  }
  json edge = json::array();
  for (std::size_t z = 0; z < sol.channel.semantic_recon_size; ++z) {
    json row = json::array();
    for (std::size_t y = 0; y < sol.channel.data_recon_size; ++y) row.push_back(sol.channel.edge_at(z, y));
    edge.push_back(row);
  }
  const auto& dg = sol.diagnostics;
  return {
      {"units", "nats"},
      {"ds", sol.pair.ds},
      {"dx", sol.pair.dx},
      {"rate", sol.rate},
      {"lambda_s", sol.lambda_s},
      {"lambda_x", sol.lambda_x},
      {"achieved_ds", sol.achieved_ds},
      {"achieved_dx", sol.achieved_dx},
      {"tilted_surrogate", tilted},
      {"dispersion_v", sol.dispersion_v},
      {"dispersion_v_tilde", sol.dispersion_v_tilde},
      {"channel",
       {{"semantic_reconstruction", sx},
        {"data_reconstruction", dy},
        {"conditional", conditional},
        {"edge", edge}}},
      {"diagnostics",
       {{"inner_solves", dg.inner_solves},
        {"sweeps", dg.sweeps},
        {"last_objective_change", dg.last_change},
        {"fixed_point_residual", dg.fixed_point_residual},
        {"ds_residual", dg.ds_residual},
        {"dx_residual", dg.dx_residual},
        {"ds_active", dg.ds_active},
        {"dx_active", dg.dx_active},
        {"zero_rate", dg.zero_rate},
        {"mutual_information", dg.mutual_information},
        {"channel_row_error", dg.channel_row_error}}},
  };
}

nlohmann::json to_json(const Property1Report& rep, const RdSolution& sol) {
  using nlohmann::json;
  json values = json::array();
  const std::size_t ny = sol.channel.data_recon_size;
  for (std::size_t z = 0; z < sol.channel.semantic_recon_size; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      values.push_back({{"z", sol.spec.semantic_recon_alphabet[z]},
                        {"y", sol.spec.data_recon_alphabet[y]},
                        {"value", rep.values[z * ny + y]},
                        {"on_support", static_cast<bool>(rep.on_support[z * ny + y])}});
    }
  }
  return {{"passed", rep.passed},
          {"worst_deviation", rep.worst_deviation},
          {"worst_z", sol.spec.semantic_recon_alphabet[rep.worst_z]},
          {"worst_y", sol.spec.data_recon_alphabet[rep.worst_y]},
          {"minimization_gap", rep.minimization_gap},
          {"values", values}};
}

}  // namespace jdslc
