#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "jdslc/model.hpp"

namespace jdslc {

/// Edge probabilities at or below this are treated as off-support.
inline constexpr double kSupportThreshold = 1e-12;
/// The certificate demands equality only above this mass. Letters that
/// leave the support decay geometrically and may stop a little above
/// kSupportThreshold.
inline constexpr double kCertifiedSupport = 1e-8;

/// Conditional law P_{ZY|X}(z, y | x) together with its edge (output)
/// distribution P_{ZY}(z, y) = sum_x P_X(x) P_{ZY|X}(z, y | x).
struct TestChannel {
  std::size_t data_size = 0;
  std::size_t semantic_recon_size = 0;
  std::size_t data_recon_size = 0;
  std::vector<double> conditional;  ///< [x][z][y]
  std::vector<double> edge;         ///< [z][y]

  double at(std::size_t x, std::size_t z, std::size_t y) const {
    return conditional[(x * semantic_recon_size + z) * data_recon_size + y];
  }
  double edge_at(std::size_t z, std::size_t y) const { return edge[z * data_recon_size + y]; }

  /// Builds a channel from its conditional table and computes the edge pmf.
  static TestChannel from_conditional(const JointSource& source, std::size_t semantic_recon_size,
                                      std::size_t data_recon_size, std::vector<double> conditional);
};

/// Largest deviation of a channel row sum from 1 over observed letters.
double channel_row_error(const JointSource& source, const TestChannel& channel);

/// Expected distortions E[dbar_s(X, Z)] and E[d_x(X, Y)] under P_X x channel.
DistortionPair expected_distortions(const JointSource& source, const DistortionSpec& spec,
                                    const TestChannel& channel);

/// I(X; Z, Y) in nats.
double mutual_information(const JointSource& source, const TestChannel& channel);

struct BaOptions {
  /// Stop once the Lagrangian decreases by less than this between sweeps...
  double objective_tol = 1e-12;
  /// ...and every on-support edge mass is a fixed point to this relative
  /// accuracy.
  double fixed_point_tol = 1e-12;
  int max_sweeps = 100000;
};

/// Result of the inner alternating minimization at fixed multipliers.
struct InnerSolution {
  TestChannel channel;
  double objective = 0.0;  ///< I(X;Z,Y) + s1 E[dbar_s] + s2 E[d_x], nats
  double achieved_ds = 0.0;
  double achieved_dx = 0.0;
  int sweeps = 0;
  double last_change = 0.0;
  double fixed_point_residual = 0.0;
  bool converged = false;
  /// Largest increase of the alternating objective between sweeps (should be
  /// at rounding level; the objective is nonincreasing).
  double max_objective_increase = 0.0;
  /// Edge pmf before tie resolution at zero multipliers; used as a warm start.
  std::vector<double> raw_edge;
};

/// Minimizes I(X;Z,Y) + s1 E[dbar_s(X,Z)] + s2 E[d_x(X,Y)] over P_{ZY|X} by
/// alternating edge and channel updates, starting from the uniform channel
/// (or from `warm_edge` when given). When a multiplier is exactly zero the
/// minimizer is not unique; the returned channel then picks, among the
/// minimizers, the one with the smallest expected distortion in the
/// unpenalized coordinate (the limit of s -> 0+).
///
/// Throws ComputationError if the sweep cap is hit before convergence.
InnerSolution ba_inner_min(const JointSource& source, const DistortionSpec& spec, double s1,
                           double s2, const BaOptions& options = {},
                           const std::vector<double>* warm_edge = nullptr);

struct SolveOptions {
  /// Complementary slackness tolerance on distortion residuals.
  double distortion_tol = 1e-10;
  /// Widened tolerance for budgets sitting on the admissible boundary.
  double boundary_distortion_tol = 1e-6;
  double max_multiplier = 1e4;
  BaOptions ba;
  /// Sweep cap for the inner solves performed while searching multipliers.
  int search_max_sweeps = 20000;
};

struct SolveDiagnostics {
  int inner_solves = 0;
  int sweeps = 0;
  double last_change = 0.0;
  double fixed_point_residual = 0.0;
  double ds_residual = 0.0;  ///< achieved - budget
  double dx_residual = 0.0;
  bool ds_active = false;
  bool dx_active = false;
  bool zero_rate = false;
  double mutual_information = 0.0;  ///< I(X;Z,Y) of the returned channel
  double channel_row_error = 0.0;
};

/// A solved point of the noisy rate-distortion function.
struct RdSolution {
  JointSource source;
  DistortionSpec spec;
  DistortionPair pair;
  double rate = 0.0;  ///< nats
  TestChannel channel;
  double lambda_s = 0.0;
  double lambda_x = 0.0;
  double achieved_ds = 0.0;
  double achieved_dx = 0.0;
  std::vector<double> tilted_surrogate;  ///< j_X(x), NaN for unobserved x
  double dispersion_v = 0.0;
  double dispersion_v_tilde = 0.0;
  SolveDiagnostics diagnostics;
};

/// Solves min I(X;Z,Y) s.t. E[dbar_s] <= ds, E[d_x] <= dx. Multipliers are
/// found by a bracketing search on s1 whose every step solves for the s2 that
/// makes the data constraint tight (or slack at s2 = 0).
RdSolution solve_rd(const JointSource& source, const DistortionSpec& spec,
                    const DistortionPair& pair, const SolveOptions& options = {});

/// j_X(x, ds, dx) = -log E[exp(l_s ds + l_x dx - l_s dbar_s(x, Z) - l_x d_x(x, Y))]
/// with (Z, Y) distributed as the solution's edge pmf.
double tilted_surrogate(const RdSolution& solution, std::size_t x);

/// Noisy tilted information i(x; z, y) + l_s d_s(s, z) + l_x d_x(x, y) - l_s ds - l_x dx.
/// Throws InvalidInput when (z, y) is off the edge support.
double tilted_noisy(const RdSolution& solution, std::size_t s, std::size_t x, std::size_t z,
                    std::size_t y);

struct Dispersions {
  double v = 0.0;        ///< Var[j_X(X)]
  double v_tilde = 0.0;  ///< Var[noisy tilted information]
  double mean_tilted = 0.0;        ///< E[j_X(X)]
  double mean_tilted_noisy = 0.0;  ///< E[noisy tilted information]
  /// E[Var[d_s(S, Z) | X, Z]] under the solution's joint law.
  double semantic_conditional_variance = 0.0;
};

Dispersions dispersions(const RdSolution& solution);

struct Property1Report {
  bool passed = true;
  /// E[exp{l_s ds + l_x dx - l_s dbar_s(X,z) - l_x d_x(X,y) + j_X(X)}], [z][y].
  std::vector<double> values;
  std::vector<bool> on_support;
  double worst_deviation = 0.0;
  std::size_t worst_z = 0;
  std::size_t worst_y = 0;
  /// |rate - (inner minimum at the solution multipliers - l_s ds - l_x dx)|.
  double minimization_gap = 0.0;
};

/// Certifies the solution's optimality conditions: the exponential moment
/// above is <= 1 everywhere and = 1 on the edge support, and the rate equals
/// the inner Lagrangian minimum at the solution's multipliers.
Property1Report check_property1(const RdSolution& solution, double tol);

struct GradientLetter {
  std::size_t letter = 0;
  bool checked = false;
  std::string skip_reason;
  double finite_difference = 0.0;  ///< d R / d Q_X(a), central difference
  double predicted = 0.0;          ///< j_X(a) - R
  double error = 0.0;
};

struct GradientReport {
  bool passed = true;
  double max_error = 0.0;
  std::vector<GradientLetter> letters;
};

/// Finite-difference check of dR/dQ_X(a) = j_X(a) - R, perturbing the
/// unnormalized data mass of each letter by +-step.
GradientReport gradient_check(const JointSource& source, const DistortionSpec& spec,
                              const DistortionPair& pair, double step, double tol,
                              const SolveOptions& options = {});

nlohmann::json to_json(const RdSolution& solution);
nlohmann::json to_json(const Property1Report& report, const RdSolution& solution);

}  // namespace jdslc
