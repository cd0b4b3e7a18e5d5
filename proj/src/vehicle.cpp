#include "reachplan/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reachplan/ode.hpp"

namespace reachplan::vehicle {

DisturbanceSignal::DisturbanceSignal() : values_{{0.0, 0.0, 0.0}} {}

DisturbanceSignal::DisturbanceSignal(std::vector<double> breakpoints, std::vector<std::array<double, 3>> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.size() != breakpoints_.size() + 1)
    throw std::invalid_argument("DisturbanceSignal: need one more value than breakpoints");
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()))
    throw std::invalid_argument("DisturbanceSignal: breakpoints must be sorted");
  for (const auto& v : values_)
    for (double c : v)
      if (!(c >= -1.0 && c <= 1.0)) throw std::invalid_argument("DisturbanceSignal: value outside [-1, 1]");
}

DisturbanceSignal DisturbanceSignal::constant(const std::array<double, 3>& d) { return DisturbanceSignal({}, {d}); }

std::array<double, 3> DisturbanceSignal::operator()(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

VariableSpace model_space() {
  static const VariableSpace space({"t", "x", "y", "th", "k1", "k2"});
  return space;
}

ErrorEnvelope::ErrorEnvelope(std::array<Polynomial, 3> g, std::string id) : g_(std::move(g)), id_(std::move(id)) {
  const auto& space = g_[0].space();
  if (g_[1].space() != space || g_[2].space() != space)
    throw std::invalid_argument("ErrorEnvelope: components must share a space");
  if (space.count() > 8) throw std::invalid_argument("ErrorEnvelope: at most 8 variables");
  const char* names[4] = {"t", "x", "y", "th"};
  for (int i = 0; i < 4; ++i)
    slots_[static_cast<std::size_t>(i)] = space.contains(names[i]) ? static_cast<int>(space.index(names[i])) : -1;
  for (std::size_t c = 0; c < 3; ++c) {
    for (const auto& [e, coef] : g_[c].terms()) {
      for (std::size_t v = 0; v < e.size(); ++v) {
        const auto& nm = space.name(v);
        if (e[v] != 0 && nm != "t" && nm != "x" && nm != "y" && nm != "th")
          throw std::invalid_argument("ErrorEnvelope: g may depend only on t, x, y, th");
      }
    }
    fast_[c] = poly::CompiledPolynomial(g_[c]);
  }
}

std::array<double, 3> ErrorEnvelope::eval(double t, const SharedState& s) const {
  std::array<double, 8> pt{};
  const double vals[4] = {t, s.x, s.y, s.th};
  for (std::size_t i = 0; i < 4; ++i)
    if (slots_[i] >= 0) pt[static_cast<std::size_t>(slots_[i])] = vals[i];
  const std::span<const double> view(pt.data(), g_[0].space().count());
  return {fast_[0](view), fast_[1](view), fast_[2](view)};
}

std::array<double, 5> unicycle_rhs(double /*t*/, const UnicycleState& s, const ControlInput& u) {
  return {s.v * std::cos(s.th), s.v * std::sin(s.th), s.thdot, u.u1, u.u2};
}

ControlInput tracking_controller(const UnicycleState& s, const TrajParams& k, const ModelConfig& cfg) {
  const double sign = cfg.literal_controller_sign ? -1.0 : 1.0;
  return {sign * cfg.yaw_gain * (k.k1 - s.thdot), sign * cfg.speed_gain * (k.k2 - s.v)};
}

std::array<double, 3> dubins_rhs(double /*t*/, const SharedState& s, const TrajParams& k) {
  return {k.k2 * std::cos(s.th), k.k2 * std::sin(s.th), k.k1};
}

namespace {

// Taylor polynomials of cos and sin in `th` up to `degree`.
std::pair<Polynomial, Polynomial> taylor_trig(const VariableSpace& space, int degree) {
  const Polynomial th = Polynomial::variable(space, "th");
  Polynomial c = Polynomial::constant(space, 1.0);
  Polynomial s(space);
  Polynomial power = Polynomial::constant(space, 1.0);
  double fact = 1.0;
  for (int n = 1; n <= degree; ++n) {
    power = power * th;
    fact *= n;
    const double sign = ((n / 2) % 2 == 0) ? 1.0 : -1.0;
    if (n % 2 == 0)
      c = c + power.scale(sign / fact);
    else
      s = s + power.scale(sign / fact);
  }
  return {c, s};
}

double taylor_cos(double th) { return 1.0 - 0.5 * th * th; }
double taylor_sin(double th) { return th - th * th * th / 6.0; }

}  // namespace

std::array<Polynomial, 3> dubins_poly(const VariableSpace& space, int degree) {
  if (degree < 1) throw std::invalid_argument("dubins_poly: degree must be positive");
  auto [c, s] = taylor_trig(space, degree);
  const Polynomial k1 = Polynomial::variable(space, "k1");
  const Polynomial k2 = Polynomial::variable(space, "k2");
  return {k2 * c, k2 * s, k1};
}

std::array<double, 3> dubins_taylor_rhs(const SharedState& s, const TrajParams& k) {
  return {k.k2 * taylor_cos(s.th), k.k2 * taylor_sin(s.th), k.k1};
}

ErrorEnvelope error_envelope(const VariableSpace& space, const ModelConfig& cfg) {
  const Polynomial shifted = Polynomial::variable(space, "t") - cfg.envelope_t_ref;
  const Polynomial verr = shifted.pow(cfg.verr_exponent);
  const Polynomial thdot_err = shifted.pow(cfg.thdot_err_exponent);
  auto [c, s] = taylor_trig(space, 3);
  return ErrorEnvelope({verr * c, verr * s, thdot_err},
                       "verr=(t-" + std::to_string(cfg.envelope_t_ref) + ")^" + std::to_string(cfg.verr_exponent) +
                           ";thdot_err=(t-" + std::to_string(cfg.envelope_t_ref) + ")^" +
                           std::to_string(cfg.thdot_err_exponent));
}

ErrorEnvelope error_envelope_default(const VariableSpace& space) { return error_envelope(space, ModelConfig{}); }

std::array<double, 3> disturbed_rhs(double t, const SharedState& s, const TrajParams& k,
                                    const std::array<double, 3>& d, const ErrorEnvelope& env) {
  for (double c : d)
    if (!(c >= -1.0 && c <= 1.0)) throw std::invalid_argument("disturbed_rhs: disturbance outside [-1, 1]");
  const auto f = dubins_taylor_rhs(s, k);
  const auto g = env.eval(t, s);
  return {f[0] + g[0] * d[0], f[1] + g[1] * d[1], f[2] + g[2] * d[2]};
}

std::size_t ParamSchedule::segment(double t) const {
  if (starts.size() != params.size() || params.empty())
    throw std::invalid_argument("ParamSchedule: starts and params must be non-empty and aligned");
  auto it = std::upper_bound(starts.begin(), starts.end(), t);
  return it == starts.begin() ? 0 : static_cast<std::size_t>(it - starts.begin()) - 1;
}

UnicycleTrace simulate_unicycle(const UnicycleState& init, const ParamSchedule& schedule, double duration,
                                const ModelConfig& cfg) {
  const int steps = static_cast<int>(std::lround(duration / cfg.dt));
  UnicycleTrace tr;
  tr.t.reserve(static_cast<std::size_t>(steps) + 1);
  tr.states.reserve(static_cast<std::size_t>(steps) + 1);
  auto x = init.to_array();
  tr.t.push_back(0.0);
  tr.states.push_back(init);
  for (int i = 0; i < steps; ++i) {
    const double t0 = i * cfg.dt;
    // Parameters are held over a step; switch points align with the grid.
    const TrajParams k = schedule.params[schedule.segment(t0 + 1e-9)];
    auto rhs = [&](double t, const std::array<double, 5>& a) {
      const auto s = UnicycleState::from_array(a);
      return unicycle_rhs(t, s, tracking_controller(s, k, cfg));
    };
    x = rk4_step(rhs, t0, x, cfg.dt);
    tr.t.push_back((i + 1) * cfg.dt);
    tr.states.push_back(UnicycleState::from_array(x));
  }
  return tr;
}

SharedTrace simulate_disturbed(const SharedState& init, const TrajParams& k, const DisturbanceSignal& d,
                               const ErrorEnvelope& env, double duration, double dt) {
  const int steps = static_cast<int>(std::lround(duration / dt));
  SharedTrace tr;
  tr.t.reserve(static_cast<std::size_t>(steps) + 1);
  tr.states.reserve(static_cast<std::size_t>(steps) + 1);
  auto x = init.to_array();
  tr.t.push_back(0.0);
  tr.states.push_back(init);
  for (int i = 0; i < steps; ++i) {
    const double t0 = i * dt;
    // Disturbance is sampled at the step start so bang-bang switches stay sharp.
    const auto dv = d(t0 + 1e-12);
    auto rhs = [&](double t, const std::array<double, 3>& a) {
      return disturbed_rhs(t, SharedState::from_array(a), k, dv, env);
    };
    x = rk4_step(rhs, t0, x, dt);
    tr.t.push_back((i + 1) * dt);
    tr.states.push_back(SharedState::from_array(x));
  }
  return tr;
}

double ErrorBoundReport::worst() const { return *std::max_element(max_violation.begin(), max_violation.end()); }

ErrorBoundReport validate_error_bound(const ParamSchedule& schedule, const UnicycleState& init, double duration,
                                      const ErrorEnvelope& env, const ModelConfig& cfg) {
  const auto trace = simulate_unicycle(init, schedule, duration, cfg);
  ErrorBoundReport rep;
  rep.max_violation.fill(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    const double t = trace.t[i];
    const std::size_t seg = schedule.segment(t + 1e-9);
    const TrajParams& k = schedule.params[seg];
    const double t_plan = t - schedule.starts[seg];
    const auto& s = trace.states[i];
    const SharedState xs{s.x, s.y, s.th};
    const std::array<double, 3> f_hi{s.v * taylor_cos(s.th), s.v * taylor_sin(s.th), s.thdot};
    const auto f_lo = dubins_taylor_rhs(xs, k);
    const auto g = env.eval(t_plan, xs);
    for (int c = 0; c < 3; ++c) {
      // d ranges over [-1, 1], so the sign of g is irrelevant
      const double viol = std::abs(f_hi[c] - f_lo[c]) - std::abs(g[c]);
      if (viol > rep.max_violation[c]) {
        rep.max_violation[c] = viol;
        rep.argmax_t[c] = t;
      }
    }
    if (!cfg.Xs.contains(std::array<double, 3>{s.x, s.y, s.th})) rep.left_domain = true;
  }
  return rep;
}

ErrorBoundReport validate_error_bound(const TrajParams& k, const UnicycleState& init, double duration,
                                      const ErrorEnvelope& env, const ModelConfig& cfg) {
  return validate_error_bound(ParamSchedule::constant(k), init, duration, env, cfg);
}

}  // namespace reachplan::vehicle
