#include "jdslc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jdslc/error.hpp"

namespace jdslc {

namespace {

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = std::to_string(i);
  return names;
}

std::string cell(const char* table, std::size_t r, std::size_t c) {
  std::ostringstream os;
  os << table << "[" << r << "][" << c << "]";
  return os.str();
}

void check_distortion_table(const Table& t, const char* name) {
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) {
      const double v = t(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        throw InvalidInput(cell(name, r, c) + " must be finite and >= 0");
      }
    }
  }
}

}  // namespace

JointSource::JointSource(Table joint_pmf, std::vector<std::string> semantic_alphabet,
                         std::vector<std::string> data_alphabet)
    : joint_(std::move(joint_pmf)),
      marginal_(joint_.cols(), 0.0),
      conditional_(joint_.rows(), joint_.cols(), std::numeric_limits<double>::quiet_NaN()),
      semantic_names_(semantic_alphabet.empty() ? default_names(joint_.rows())
                                                : std::move(semantic_alphabet)),
      data_names_(data_alphabet.empty() ? default_names(joint_.cols()) : std::move(data_alphabet)) {
  if (semantic_names_.size() != joint_.rows() || data_names_.size() != joint_.cols()) {
    throw InvalidInput("alphabet sizes do not match the joint pmf dimensions");
  }
  for (std::size_t x = 0; x < joint_.cols(); ++x) {
    double m = 0.0;
    for (std::size_t s = 0; s < joint_.rows(); ++s) m += joint_(s, x);
    // Negative or non-finite columns are reported by validate_source.
    marginal_[x] = std::isfinite(m) && m > 0.0 ? m : 0.0;
    if (marginal_[x] > 0.0) {
      for (std::size_t s = 0; s < joint_.rows(); ++s) conditional_(s, x) = joint_(s, x) / m;
    }
  }
}

JointSource JointSource::with_data_marginal(const std::vector<double>& px) const {
  if (px.size() != data_size()) throw InvalidInput("marginal has the wrong length");
  Table joint(semantic_size(), data_size(), 0.0);
  for (std::size_t x = 0; x < data_size(); ++x) {
    if (px[x] == 0.0) continue;
    if (!observed(x)) {
      throw InvalidInput("cannot give mass to data letter " + data_names_[x] +
                         ": its semantic conditional is undefined");
    }
    for (std::size_t s = 0; s < semantic_size(); ++s) joint(s, x) = px[x] * conditional(s, x);
  }
  return JointSource(std::move(joint), semantic_names_, data_names_);
}

std::vector<Violation> validate_source(const JointSource& source) {
  std::vector<Violation> out;
  const Table& p = source.joint_pmf();
  if (p.rows() == 0 || p.cols() == 0) {
    out.push_back({"joint_pmf", "alphabets must be nonempty"});
    return out;
  }
  double mass = 0.0;
  bool finite = true;
  for (std::size_t s = 0; s < p.rows(); ++s) {
    for (std::size_t x = 0; x < p.cols(); ++x) {
      const double v = p(s, x);
      if (!std::isfinite(v)) {
        out.push_back({cell("joint_pmf", s, x), "entry is not finite"});
        finite = false;
      } else if (v < 0.0) {
        std::ostringstream os;
        os << "negative probability " << v;
        out.push_back({cell("joint_pmf", s, x), os.str()});
      }
      mass += v;
    }
  }
  if (finite && std::abs(mass - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(15);
    os << "mass = " << mass;
    out.push_back({"joint_pmf", os.str()});
  }
  return out;
}

void require_valid(const JointSource& source) {
  const auto violations = validate_source(source);
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid source:";
  for (const auto& v : violations) os << " " << v.location << ": " << v.message << ";";
  throw InvalidInput(os.str());
}

Table surrogate_distortion(const JointSource& source, const Table& ds_table) {
  if (ds_table.rows() != source.semantic_size()) {
    throw InvalidInput("ds_table must have one row per semantic letter");
  }
  const std::size_t nz = ds_table.cols();
  Table out(source.data_size(), nz, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t x = 0; x < source.data_size(); ++x) {
    if (!source.observed(x)) continue;
    for (std::size_t z = 0; z < nz; ++z) {
      double acc = 0.0;
      for (std::size_t s = 0; s < source.semantic_size(); ++s) {
        acc += source.conditional(s, x) * ds_table(s, z);
      }
      out(x, z) = acc;
    }
  }
  return out;
}

DistortionSpec make_distortion_spec(const JointSource& source, Table ds_table, Table dx_table,
                                    std::vector<std::string> semantic_recon_alphabet,
                                    std::vector<std::string> data_recon_alphabet) {
  if (ds_table.rows() != source.semantic_size() || ds_table.cols() == 0) {
    throw InvalidInput("ds_table dimensions do not match the semantic alphabet");
  }
  if (dx_table.rows() != source.data_size() || dx_table.cols() == 0) {
    throw InvalidInput("dx_table dimensions do not match the data alphabet");
  }
  check_distortion_table(ds_table, "ds_table");
  check_distortion_table(dx_table, "dx_table");
  if (semantic_recon_alphabet.empty()) semantic_recon_alphabet = default_names(ds_table.cols());
  if (data_recon_alphabet.empty()) data_recon_alphabet = default_names(dx_table.cols());
  if (semantic_recon_alphabet.size() != ds_table.cols() ||
      data_recon_alphabet.size() != dx_table.cols()) {
    throw InvalidInput("reconstruction alphabet sizes do not match the distortion tables");
  }
  DistortionSpec spec;
  spec.surrogate_ds = surrogate_distortion(source, ds_table);
  spec.ds_table = std::move(ds_table);
  spec.dx_table = std::move(dx_table);
  spec.semantic_recon_alphabet = std::move(semantic_recon_alphabet);
  spec.data_recon_alphabet = std::move(data_recon_alphabet);
  return spec;
}

DistortionPair admissible_bounds(const JointSource& source, const DistortionSpec& spec) {
  DistortionPair b;
  for (std::size_t x = 0; x < source.data_size(); ++x) {
    if (!source.observed(x)) continue;
    double zmin = std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < spec.semantic_recon_size(); ++z) {
      zmin = std::min(zmin, spec.surrogate_ds(x, z));
    }
    double ymin = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < spec.data_recon_size(); ++y) ymin = std::min(ymin, spec.dx_table(x, y));
    b.ds += source.data_marginal(x) * zmin;
    b.dx += source.data_marginal(x) * ymin;
  }
  return b;
}

DistortionPair zero_rate_thresholds(const JointSource& source, const DistortionSpec& spec) {
  DistortionPair t{std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()};
  for (std::size_t z = 0; z < spec.semantic_recon_size(); ++z) {
    double e = 0.0;
    for (std::size_t x = 0; x < source.data_size(); ++x) {
      if (source.observed(x)) e += source.data_marginal(x) * spec.surrogate_ds(x, z);
    }
    t.ds = std::min(t.ds, e);
  }
  for (std::size_t y = 0; y < spec.data_recon_size(); ++y) {
    double e = 0.0;
    for (std::size_t x = 0; x < source.data_size(); ++x) {
      if (source.observed(x)) e += source.data_marginal(x) * spec.dx_table(x, y);
    }
    t.dx = std::min(t.dx, e);
  }
  return t;
}

bool is_admissible(const DistortionPair& pair, const DistortionPair& bounds, double tol) {
  return std::isfinite(pair.ds) && std::isfinite(pair.dx) && pair.ds >= bounds.ds - tol &&
         pair.dx >= bounds.dx - tol;
}

}  // namespace jdslc
