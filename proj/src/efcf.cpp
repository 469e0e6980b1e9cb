#include "jdslc/efcf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "jdslc/error.hpp"

namespace jdslc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

// log(a / b) for a, b >= 0, giving +inf when b vanishes.
double log_ratio(double a, double b) { return std::log(a) - std::log(b); }

// lambda * slack with inf * 0 = 0.
double penalty(double lambda, double slack) {
  if (std::isinf(lambda)) {
    if (slack == 0.0) return 0.0;
    return slack > 0.0 ? kInf : -kInf;
  }
  return lambda * slack;
}

// Builds a channel from the joint law P_{X,Z,Y} indexed [x][z][y].
TestChannel channel_from_joint(const SourceFile& inst, const std::array<double, 18>& joint) {
  std::vector<double> conditional(18, 0.0);
  for (std::size_t x = 0; x < 3; ++x) {
    const double px = inst.source.data_marginal(x);
    for (std::size_t k = 0; k < 6; ++k) conditional[x * 6 + k] = joint[x * 6 + k] / px;
  }
  return TestChannel::from_conditional(inst.source, 2, 3, std::move(conditional));
}

std::size_t jidx(std::size_t x, std::size_t z, std::size_t y) { return x * 6 + z * 3 + y; }

}  // namespace

void validate(const EfcfParams& p) {
  if (!(p.delta > 0.0 && p.delta < 1.0 / 3.0)) {
    std::ostringstream os;
    os << "erasure probability must satisfy 0 < delta < 1/3 (got " << p.delta << ")";
    throw InvalidInput(os.str());
  }
  if (!std::isfinite(p.pair.ds) || !std::isfinite(p.pair.dx)) {
    throw InvalidInput("distortion budgets must be finite");
  }
  if (p.pair.ds < p.delta / 2.0 - kRegionSlack) {
    std::ostringstream os;
    os << "semantic budget must satisfy ds >= delta/2 = " << p.delta / 2.0 << " (got " << p.pair.ds
       << ")";
    throw InvalidInput(os.str());
  }
  if (p.pair.dx < -kRegionSlack) throw InvalidInput("data budget must satisfy dx >= 0");
}

std::string to_string(RegionLabel label) {
  return "D" + std::to_string(static_cast<int>(label) + 1);
}

std::string Region::members_string() const {
  std::string out;
  for (std::size_t i = 0; i < 5; ++i) {
    if (!members.test(i)) continue;
    if (!out.empty()) out += ' ';
    out += to_string(static_cast<RegionLabel>(i));
  }
  return out;
}

Region classify_region(const EfcfParams& params) {
  validate(params);
  const double d = params.delta;
  const double ds = params.pair.ds;
  const double dx = params.pair.dx;
  const double e = kRegionSlack;
  Region r;
  r.members[0] = dx <= 2 * d + e && ds >= dx / 2 + d / 2 - e;
  r.members[1] = dx >= 2 * d - e && dx <= 0.5 + d / 2 + e && ds >= dx - d / 2 - e;
  r.members[2] = dx >= ds + d / 2 - e && ds >= d / 2 - e && ds <= 0.5 + e;
  r.members[3] = dx >= 2 * ds - d - e && dx <= ds + d / 2 + e && ds >= d / 2 - e &&
                 ds <= 1.5 * d + e;
  r.members[4] = dx >= 0.5 + d / 2 - e && ds >= 0.5 - e;
  if (r.members.none()) {
    std::ostringstream os;
    os << "pair (" << ds << ", " << dx << ") lies in no region for delta = " << d;
    throw InvalidInput(os.str());
  }
  for (RegionLabel l : {RegionLabel::D4, RegionLabel::D1, RegionLabel::D2, RegionLabel::D3,
                        RegionLabel::D5}) {
    if (r.contains(l)) {
      r.primary = l;
      break;
    }
  }
  return r;
}

double binary_entropy(double p) { return -xlogx(p) - xlogx(1.0 - p); }

double ternary_entropy(double a, double b, double c) { return -xlogx(a) - xlogx(b) - xlogx(c); }

double efcf_rate(const EfcfParams& params) {
  const Region region = classify_region(params);
  const double d = params.delta;
  const double ds = params.pair.ds;
  const double dx = params.pair.dx;
  double rate = 0.0;
  switch (region.primary) {
    case RegionLabel::D1:
      rate = binary_entropy(d) + (1 - d) * kLn2 - binary_entropy(dx) - dx * kLn2;
      break;
    case RegionLabel::D2:
      rate = (1 - d) * (kLn2 - binary_entropy((dx - d) / (1 - d)));
      break;
    case RegionLabel::D3:
      rate = (1 - d) * (kLn2 - binary_entropy((ds - d / 2) / (1 - d)));
      break;
    case RegionLabel::D4:
      rate = binary_entropy(d) + (1 - d) * kLn2 -
             ternary_entropy(ds - d / 2, dx - ds + d / 2, 1 - dx);
      break;
    case RegionLabel::D5:
      rate = 0.0;
      break;
  }
  return std::max(rate, 0.0);
}

SourceFile efcf_instance(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("erasure probability must lie in (0, 1)");
  const double a = (1 - delta) / 2;
  const double b = delta / 2;
  Table joint(2, 3, std::vector<double>{a, 0.0, b, 0.0, a, b});
  Table ds(2, 2, std::vector<double>{0, 1, 1, 0});
  Table dx(3, 3, std::vector<double>{0, 1, 1, 1, 0, 1, 1, 1, 0});
  SourceFile out;
  out.source = JointSource(std::move(joint), {"0", "1"}, {"0", "1", "e"});
  out.spec = make_distortion_spec(out.source, std::move(ds), std::move(dx), {"0", "1"},
                                  {"0", "1", "e"});
  return out;
}

TestChannel efcf_channel(const EfcfParams& params) {
  const Region region = classify_region(params);
  const double d = params.delta;
  const double ds = params.pair.ds;
  const double dx = params.pair.dx;
  const SourceFile inst = efcf_instance(d);
  std::array<double, 18> joint{};

  switch (region.primary) {
    case RegionLabel::D1: {
      // X - Y - Z: Y is a noisy copy of X, Z repeats Y and guesses on erasure.
      const double py_bit = (1 - d - dx) / (2 - 3 * dx);
      const double py[3] = {py_bit, py_bit, (2 * d - dx) / (2 - 3 * dx)};
      for (std::size_t y = 0; y < 3; ++y) {
        for (std::size_t x = 0; x < 3; ++x) {
          const double pxy = py[y] * (x == y ? 1 - dx : dx / 2);
          if (y == kErased) {
            joint[jidx(x, 0, y)] = pxy / 2;
            joint[jidx(x, 1, y)] = pxy / 2;
          } else {
            joint[jidx(x, y, y)] = pxy;
          }
        }
      }
      break;
    }
    case RegionLabel::D2: {
      for (std::size_t y = 0; y < 2; ++y) {
        for (std::size_t x = 0; x < 3; ++x) {
          const double cond = x == kErased ? d : (x == y ? 1 - dx : dx - d);
          joint[jidx(x, y, y)] = 0.5 * cond;
        }
      }
      break;
    }
    case RegionLabel::D3: {
      for (std::size_t z = 0; z < 2; ++z) {
        for (std::size_t x = 0; x < 3; ++x) {
          const double cond = x == kErased ? d : (x == z ? 1 - ds - d / 2 : ds - d / 2);
          joint[jidx(x, z, z)] = 0.5 * cond;
        }
      }
      break;
    }
    case RegionLabel::D4: {
      const double den = d + 4 * dx - 2 * ds - 2;
      // Clamped so that rounding on the D3 edge (dx = ds + delta/2) cannot go negative.
      const double matched = std::max(0.0, (d + dx - 1) / den);
      const double erased = std::max(0.0, (dx - ds - d / 2) / den);
      const double g[3] = {2 * (1 - dx) / (1 - d), 2 * (1 - dx) / (1 - d), (1 - dx) / d};
      const double c_same = 1.0;
      const double c_flip = (ds - d / 2) / (1 - dx);
      const double c_cross = (d / 2 + dx - ds) / (1 - dx);
      for (std::size_t z = 0; z < 2; ++z) {
        const std::size_t other = 1 - z;
        // y = z: x = z, x = 1 - z, x = e
        joint[jidx(z, z, z)] = matched * g[z] * c_same;
        joint[jidx(other, z, z)] = matched * g[other] * c_flip;
        joint[jidx(kErased, z, z)] = matched * g[kErased] * c_cross;
        // y = e: x = e, x = 1 - z, x = z
        joint[jidx(kErased, z, kErased)] = erased * g[kErased] * c_same;
        joint[jidx(other, z, kErased)] = erased * g[other] * c_flip;
        joint[jidx(z, z, kErased)] = erased * g[z] * c_cross;
      }
      // The entries above are conditionals; weight them by P_X.
      for (std::size_t x = 0; x < 3; ++x) {
        for (std::size_t k = 0; k < 6; ++k) joint[x * 6 + k] *= inst.source.data_marginal(x);
      }
      break;
    }
    case RegionLabel::D5:
      for (std::size_t x = 0; x < 3; ++x) joint[jidx(x, 0, 0)] = inst.source.data_marginal(x);
      break;
  }
  return channel_from_joint(inst, joint);
}

double tilted_from_edge(const DistortionSpec& spec, const std::vector<double>& edge, std::size_t x,
                        double lambda_s, double lambda_x, const DistortionPair& pair) {
  const std::size_t nz = spec.semantic_recon_size();
  const std::size_t ny = spec.data_recon_size();
  double m = -kInf;
  std::vector<double> terms;
  for (std::size_t z = 0; z < nz; ++z) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double q = edge[z * ny + y];
      if (q <= 0.0) continue;
      const double t = std::log(q) + penalty(lambda_s, pair.ds - spec.surrogate_ds(x, z)) +
                       penalty(lambda_x, pair.dx - spec.dx_table(x, y));
      terms.push_back(t);
      m = std::max(m, t);
    }
  }
  if (m == -kInf) return kInf;
  if (m == kInf) return -kInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return -(m + std::log(acc));
}

EfcfPoint efcf_point(const EfcfParams& params) {
  EfcfPoint pt;
  pt.params = params;
  pt.region = classify_region(params);
  pt.rate = efcf_rate(params);
  pt.channel = efcf_channel(params);
  const double d = params.delta;
  const double ds = params.pair.ds;
  const double dx = params.pair.dx;

  switch (pt.region.primary) {
    case RegionLabel::D1:
      pt.lambda_x = log_ratio(2 * (1 - dx), dx);
      break;
    case RegionLabel::D2:
      pt.lambda_x = log_ratio(1 - dx, dx - d);
      break;
    case RegionLabel::D3:
      pt.lambda_s = log_ratio(1 - d / 2 - ds, ds - d / 2);
      break;
    case RegionLabel::D4:
      pt.lambda_s = log_ratio(dx - ds + d / 2, ds - d / 2);
      pt.lambda_x = log_ratio(1 - dx, dx - ds + d / 2);
      break;
    case RegionLabel::D5:
      break;
  }
  // log(1) on a region edge can round just below zero.
  pt.lambda_s = std::max(0.0, pt.lambda_s);
  pt.lambda_x = std::max(0.0, pt.lambda_x);

  const bool finite_multipliers = std::isfinite(pt.lambda_s) && std::isfinite(pt.lambda_x);
  if (pt.region.primary == RegionLabel::D4 && finite_multipliers) {
    const double base = -pt.lambda_s * ds - pt.lambda_x * dx;
    const double root_r = std::sqrt((ds - d / 2) / (dx - ds + d / 2));
    pt.j0 = base - std::log((1 - d) / (2 * (1 - dx)));
    pt.je = base - std::log(root_r * d / (1 - dx));
    const double spread = std::log(root_r * 2 * d / (1 - d));
    pt.v = d * (1 - d) * spread * spread;
  } else {
    const SourceFile inst = efcf_instance(d);
    pt.j0 = tilted_from_edge(inst.spec, pt.channel.edge, 0, pt.lambda_s, pt.lambda_x, params.pair);
    pt.je =
        tilted_from_edge(inst.spec, pt.channel.edge, kErased, pt.lambda_s, pt.lambda_x, params.pair);
    const double mean = (1 - d) * pt.j0 + d * pt.je;
    pt.v = (1 - d) * (pt.j0 - mean) * (pt.j0 - mean) + d * (pt.je - mean) * (pt.je - mean);
  }
  // Only erased letters leave semantic uncertainty, with conditional variance 1/4.
  pt.v_tilde = pt.lambda_s == 0.0 ? pt.v : pt.v + d / 4 * pt.lambda_s * pt.lambda_s;
  pt.p_y_erasure = pt.channel.edge_at(0, kErased) + pt.channel.edge_at(1, kErased);
  return pt;
}

nlohmann::json to_json(const EfcfPoint& pt) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json members = json::array();
  for (std::size_t i = 0; i < 5; ++i) {
    if (pt.region.members.test(i)) members.push_back(to_string(static_cast<RegionLabel>(i)));
  }
  json edge = json::array();
  for (std::size_t z = 0; z < 2; ++z) {
    json row = json::array();
    for (std::size_t y = 0; y < 3; ++y) row.push_back(pt.channel.edge_at(z, y));
    edge.push_back(row);
  }
  return {{"delta", pt.params.delta},
          {"ds", pt.params.pair.ds},
          {"dx", pt.params.pair.dx},
          {"region", to_string(pt.region.primary)},
          {"members", members},
          {"boundary", pt.region.on_boundary()},
          {"units", "nats"},
          {"rate", pt.rate},
          {"lambda_s", num(pt.lambda_s)},
          {"lambda_x", num(pt.lambda_x)},
          {"j0", num(pt.j0)},
          {"je", num(pt.je)},
          {"v", num(pt.v)},
          {"v_tilde", num(pt.v_tilde)},
          {"p_y_erasure", pt.p_y_erasure},
          {"edge", edge}};
}

}  // namespace jdslc
