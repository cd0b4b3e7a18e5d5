#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reachplan/polynomial.hpp"
#include "reachplan/sdp.hpp"
#include "reachplan/sos.hpp"
#include "reachplan/vehicle.hpp"

namespace reachplan::frs {

using poly::AffineMap;
using poly::Box;
using poly::Interval;
using poly::Polynomial;
using poly::VariableSpace;

/// Disturbed polynomial model x' = f(t, x, k) + g(t, x) (.) d, d in [-1,1]^n,
/// on [0,T] x Xs x K, started from X0. The space lists t, then states, then
/// parameters.
struct FrsModel {
  VariableSpace space;
  std::vector<std::string> states;
  std::vector<std::string> params;
  std::vector<Polynomial> f;
  std::vector<Polynomial> g;
  Box Xs;
  /// One interval per state; lo == hi pins that coordinate.
  std::vector<Interval> X0;
  Box K;
  double T = 1.0;
  std::string g_id;

  void validate() const;
};

FrsModel dubins_model(const vehicle::ModelConfig& cfg = {});
/// x' = k + 0.1 d on x in [-1,1], k in [-0.5,0.5], X0 = [-0.1,0.1], T = 1.
FrsModel sanity_model_1d();

struct FrsProgram {
  sos::SosProgram program;
  sos::LinPoly v;
  sos::LinPoly w;
  std::vector<sos::LinPoly> q;
  int d_dec = 0;
  int two_l = 0;
  /// Affine maps physical = scale * z + offset, one per space variable.
  std::vector<AffineMap> maps;
};

/// Smallest even relaxation degree covering every constraint of the program.
int required_two_l(const FrsModel& model, int d_dec);

/// Throws std::invalid_argument when `two_l` (0 = automatic) is below the
/// operator degrees.
FrsProgram build_program(const FrsModel& model, int d_dec, int two_l = 0);

struct Certificate {
  static constexpr int kSchemaVersion = 1;

  VariableSpace space;
  std::vector<std::string> states;
  std::vector<std::string> params;
  std::vector<AffineMap> maps;
  double T = 1.0;
  Box Xs;
  std::vector<Interval> X0;
  Box K;
  int d_dec = 0;
  int two_l = 0;
  /// Polynomials in scaled coordinates z in [-1,1]^n.
  Polynomial v;
  Polynomial w;
  std::vector<Polynomial> q;
  std::string g_id;
  std::string config_hash;
  nlohmann::json diagnostics;

  /// Scaled coordinates of a physical point given in space order.
  std::vector<double> to_scaled(std::span<const double> physical) const;
  /// w at physical (states..., params...).
  double w_at(std::span<const double> state, std::span<const double> params) const;
  double v_at(double t, std::span<const double> state, std::span<const double> params) const;
  /// w re-expressed in physical coordinates.
  Polynomial w_physical() const;

  nlohmann::json to_json() const;
  static Certificate from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Certificate load(const std::string& path);
};

/// Solver settings for FRS programs: the large degree-8 relaxation stalls
/// near 1e-7 relative residual, so the tolerances sit one decade above.
inline sdp::SolverOptions frs_solver_defaults() {
  sdp::SolverOptions s;
  s.tol_primal = s.tol_dual = s.tol_gap = 1e-6;
  return s;
}

struct ComputeOptions {
  int d_dec = 4;
  int two_l = 0;
  sdp::SolverOptions solver = frs_solver_defaults();
  std::string config_hash;
};

/// Solves the program and returns the certificate. Throws std::runtime_error
/// when the solver does not report an optimal solution.
Certificate compute_frs(const FrsModel& model, const ComputeOptions& options);

struct IdentityReport {
  /// Minimum over sampled points of each constraint expression, in order
  /// (i) -L_f v - sum q, (ii) q_i - |L_g_i v| (min over i), (iv) q_i, (v) -v(0),
  /// (vi) w, (vii) w + v - 1.
  std::vector<std::pair<std::string, double>> minima;
  int samples = 0;
  double worst() const;
};

IdentityReport check_identities(const Certificate& cert, const FrsModel& model, int samples, std::uint64_t seed);

struct ValidationReport {
  int trajectories = 0;
  int points = 0;
  int violations = 0;
  int out_of_domain = 0;
  double min_margin = 0.0;  // min of w - 1 over checked points
  std::vector<double> worst_point;  // states then params
  double tol = 1e-4;
  bool ok() const { return violations == 0; }
};

/// Integrates the disturbed model from random X0 x K samples with piecewise
/// constant disturbances (up to 4 breakpoints, extremes included) and checks
/// w >= 1 - tol along every trajectory.
ValidationReport validate_certificate(const Certificate& cert, const FrsModel& model, int trajectories,
                                      std::uint64_t seed, double tol = 1e-4);

/// Replays tracked unicycle trajectories (random initial rates and speeds)
/// against the certificate.
ValidationReport validate_unicycle(const Certificate& cert, const vehicle::ModelConfig& cfg, int trajectories,
                                   std::uint64_t seed, double tol = 1e-4);

}  // namespace reachplan::frs
