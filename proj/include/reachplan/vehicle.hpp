#pragma once

#include <array>
#include <string>
#include <vector>

#include "reachplan/polynomial.hpp"

namespace reachplan::vehicle {

using poly::Box;
using poly::Interval;
using poly::Polynomial;
using poly::VariableSpace;

/// Dynamic unicycle state (high-fidelity model).
struct UnicycleState {
  double x = 0.0;
  double y = 0.0;
  double th = 0.0;
  double thdot = 0.0;
  double v = 0.0;

  std::array<double, 5> to_array() const { return {x, y, th, thdot, v}; }
  static UnicycleState from_array(const std::array<double, 5>& a) { return {a[0], a[1], a[2], a[3], a[4]}; }
};

/// Position and heading shared by both models.
struct SharedState {
  double x = 0.0;
  double y = 0.0;
  double th = 0.0;

  std::array<double, 3> to_array() const { return {x, y, th}; }
  static SharedState from_array(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }
};

/// Trajectory parameters: commanded yaw rate k1 (rad/s) and speed k2 (m/s).
struct TrajParams {
  double k1 = 0.0;
  double k2 = 0.0;
  bool operator==(const TrajParams&) const = default;
};

struct ControlInput {
  double u1 = 0.0;
  double u2 = 0.0;
};

/// Piecewise-constant disturbance d : [0,T] -> [-1,1]^3. `values[i]` holds on
/// [breakpoints[i-1], breakpoints[i]) with implicit -inf / +inf ends.
class DisturbanceSignal {
 public:
  DisturbanceSignal();
  DisturbanceSignal(std::vector<double> breakpoints, std::vector<std::array<double, 3>> values);
  static DisturbanceSignal constant(const std::array<double, 3>& d);

  std::array<double, 3> operator()(double t) const;
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<std::array<double, 3>>& values() const { return values_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<std::array<double, 3>> values_;
};

/// Model constants. Defaults are the values used throughout the toolkit.
struct ModelConfig {
  double yaw_gain = 20.0;
  double speed_gain = 10.0;
  /// Use the printed positive-feedback controller form instead of the
  /// stabilizing one (inspection only).
  bool literal_controller_sign = false;
  double v_max = 1.0;
  Box K{{{-0.5, 0.5}, {0.0, 1.0}}};
  /// Planning-frame box for (x, y, th).
  Box Xs{{{-1.25, 0.75}, {-0.6, 0.6}, {-0.75, 0.75}}};
  /// Initial footprint (x, y); heading starts at `x0_heading`.
  Box X0{{{-0.85, -0.65}, {-0.05, 0.05}}};
  double x0_heading = 0.0;
  int verr_exponent = 2;
  int thdot_err_exponent = 4;
  /// Envelope reference time: v_err(t) = (t - t_ref)^p.
  double envelope_t_ref = 1.0;
  double horizon = 1.0;
  double dt = 0.01;
};

/// Variables (t, x, y, th, k1, k2) in this order.
VariableSpace model_space();

/// Error envelope g(t, x, y, th): three polynomials over a space containing t and th.
class ErrorEnvelope {
 public:
  ErrorEnvelope() = default;
  ErrorEnvelope(std::array<Polynomial, 3> g, std::string id);

  const std::array<Polynomial, 3>& g() const { return g_; }
  const std::string& id() const { return id_; }
  std::array<double, 3> eval(double t, const SharedState& s) const;

 private:
  std::array<Polynomial, 3> g_;
  std::string id_;
  std::array<poly::CompiledPolynomial, 3> fast_;
  // positions of t, x, y, th in the envelope space (-1 when absent)
  std::array<int, 4> slots_{-1, -1, -1, -1};
};

std::array<double, 5> unicycle_rhs(double t, const UnicycleState& s, const ControlInput& u);

ControlInput tracking_controller(const UnicycleState& s, const TrajParams& k, const ModelConfig& cfg = {});

std::array<double, 3> dubins_rhs(double t, const SharedState& s, const TrajParams& k);

/// Third-order Taylor Dubins field over `space` (must contain th, k1, k2).
std::array<Polynomial, 3> dubins_poly(const VariableSpace& space, int degree = 3);

ErrorEnvelope error_envelope(const VariableSpace& space, const ModelConfig& cfg);
ErrorEnvelope error_envelope_default(const VariableSpace& space = model_space());

/// f_s + g (.) d evaluated with the polynomial field.
std::array<double, 3> disturbed_rhs(double t, const SharedState& s, const TrajParams& k,
                                    const std::array<double, 3>& d, const ErrorEnvelope& env);

/// Evaluates the polynomial Dubins field without building polynomials.
std::array<double, 3> dubins_taylor_rhs(const SharedState& s, const TrajParams& k);

/// Piecewise-constant parameter schedule: `params[i]` starts at `starts[i]`.
struct ParamSchedule {
  std::vector<double> starts{0.0};
  std::vector<TrajParams> params;

  static ParamSchedule constant(const TrajParams& k) { return {{0.0}, {k}}; }
  /// Index of the active segment at time t.
  std::size_t segment(double t) const;
};

struct UnicycleTrace {
  std::vector<double> t;
  std::vector<UnicycleState> states;
};

/// Closed-loop RK4 integration of the unicycle under the tracking controller.
UnicycleTrace simulate_unicycle(const UnicycleState& init, const ParamSchedule& schedule, double duration,
                                const ModelConfig& cfg = {});

struct SharedTrace {
  std::vector<double> t;
  std::vector<SharedState> states;
};

/// RK4 integration of the disturbed polynomial low-fidelity model.
SharedTrace simulate_disturbed(const SharedState& init, const TrajParams& k, const DisturbanceSignal& d,
                               const ErrorEnvelope& env, double duration, double dt);

struct ErrorBoundReport {
  /// max over samples of |f_i - f_s,i| - |g_i|; <= 0 means the envelope holds.
  std::array<double, 3> max_violation{};
  /// Time at which each component's maximum was attained.
  std::array<double, 3> argmax_t{};
  bool left_domain = false;
  double worst() const;
};

/// Integrates the tracked unicycle and compares shared-state rates against
/// the low-fidelity field, envelope time measured from the latest parameter
/// switch. Trig terms of both models use the Taylor polynomials so the
/// comparison isolates speed and yaw-rate tracking error.
ErrorBoundReport validate_error_bound(const ParamSchedule& schedule, const UnicycleState& init, double duration,
                                      const ErrorEnvelope& env, const ModelConfig& cfg = {});
ErrorBoundReport validate_error_bound(const TrajParams& k, const UnicycleState& init, double duration,
                                      const ErrorEnvelope& env, const ModelConfig& cfg = {});

}  // namespace reachplan::vehicle
