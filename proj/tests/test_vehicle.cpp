#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "reachplan/vehicle.hpp"

using namespace reachplan;
using namespace reachplan::vehicle;

namespace {

SharedState at_theta(double th) { return {0.0, 0.0, th}; }

}  // namespace

TEST_CASE("unicycle right-hand side") {
  auto d = unicycle_rhs(0.0, {0, 0, 0, 0, 1}, {0, 0});
  CHECK(d == std::array<double, 5>{1, 0, 0, 0, 0});
  d = unicycle_rhs(0.0, {0, 0, M_PI / 2, 0, 1}, {0, 0});
  CHECK(d[0] == doctest::Approx(0.0).epsilon(1e-15).scale(1.0));
  CHECK(d[1] == doctest::Approx(1.0));
  d = unicycle_rhs(0.0, {0, 0, 0, 0.3, 0}, {0, 0});
  CHECK(d == std::array<double, 5>{0, 0, 0.3, 0, 0});
}

TEST_CASE("tracking controller signs") {
  auto u = tracking_controller({0, 0, 0, 0.5, 0.7}, {0.5, 0.7});
  CHECK(u.u1 == 0.0);
  CHECK(u.u2 == 0.0);
  u = tracking_controller({0, 0, 0, 0.0, 0.0}, {0.5, 0.0});
  CHECK(u.u1 == doctest::Approx(10.0));
  u = tracking_controller({0, 0, 0, 0.0, 1.0}, {0.0, 0.0});
  CHECK(u.u2 == doctest::Approx(-10.0));
  ModelConfig literal;
  literal.literal_controller_sign = true;
  CHECK(tracking_controller({0, 0, 0, 0.0, 0.0}, {0.5, 0.0}, literal).u1 < 0.0);
}

TEST_CASE("closed loop converges exponentially") {
  const auto tr = simulate_unicycle({0, 0, 0, -0.5, 1.0}, ParamSchedule::constant({0.5, 0.0}), 0.5);
  const auto& s = tr.states.back();
  // speed error decays at rate 10
  CHECK(std::abs(s.v - 0.0) <= std::exp(-5.0) * 1.0 + 1e-6);
  CHECK(std::abs(s.thdot - 0.5) <= std::exp(-10.0) * 1.0 + 1e-6);
  CHECK(tr.t.size() == 51);
}

TEST_CASE("Dubins field examples") {
  CHECK(dubins_rhs(0, at_theta(0), {0, 1}) == std::array<double, 3>{1, 0, 0});
  CHECK(dubins_rhs(0, at_theta(1.3), {0.5, 0}) == std::array<double, 3>{0, 0, 0.5});
  const auto d = dubins_rhs(0, at_theta(M_PI), {0, 1});
  CHECK(d[0] == doctest::Approx(-1.0));
  CHECK(d[1] == doctest::Approx(0.0).epsilon(1e-15).scale(1.0));
}

TEST_CASE("Taylor Dubins polynomial") {
  const auto sp = model_space();
  const auto f = dubins_poly(sp);
  CHECK(f[2].max_coeff_diff(Polynomial::variable(sp, "k1")) == 0.0);
  auto at = [&](double th, double k1, double k2) { return std::array<double, 6>{0, 0, 0, th, k1, k2}; };
  const auto z = at(0.0, 0.3, 0.8);
  CHECK(f[0].eval(z) == doctest::Approx(0.8));
  CHECK(f[1].eval(z) == 0.0);
  CHECK(f[2].eval(z) == doctest::Approx(0.3));
  const auto h = at(0.5, 0.0, 1.0);
  CHECK(f[0].eval(h) == doctest::Approx(0.875));
  CHECK(std::abs(f[0].eval(h) - std::cos(0.5)) < 3e-3);
  // agreement with the exact field, bounded by the Taylor remainders
  for (int i = 0; i <= 60; ++i)
    for (double k2 : {0.0, 0.5, 1.0}) {
      const double th = -0.6 + 0.02 * i;
      const auto e = dubins_rhs(0, at_theta(th), {0.2, k2});
      const auto q = at(th, 0.2, k2);
      CHECK(std::abs(f[0].eval(q) - e[0]) <= k2 * std::pow(th, 4) / 24 + 1e-15);
      CHECK(std::abs(f[1].eval(q) - e[1]) <= k2 * std::pow(std::abs(th), 5) / 120 + 1e-15);
    }
}

TEST_CASE("default error envelope") {
  const auto env = error_envelope_default();
  auto g = env.eval(1.0, at_theta(0));
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 0.0);
  g = env.eval(0.0, at_theta(0));
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == 0.0);
  CHECK(g[2] == doctest::Approx(1.0));
  g = env.eval(0.5, at_theta(0));
  CHECK(g[0] == doctest::Approx(0.25));
  CHECK(g[2] == doctest::Approx(0.0625));
}

TEST_CASE("disturbed field") {
  const auto env = error_envelope_default();
  const auto sp = model_space();
  const auto f = dubins_poly(sp);
  const std::array<double, 6> z{0.3, 0, 0, 0.2, 0.1, 0.6};
  const auto d0 = disturbed_rhs(0.3, {0, 0, 0.2}, {0.1, 0.6}, {0, 0, 0}, env);
  for (int i = 0; i < 3; ++i) CHECK(d0[static_cast<std::size_t>(i)] == doctest::Approx(f[static_cast<std::size_t>(i)].eval(z)));
  auto d = disturbed_rhs(0.0, at_theta(0), {0, 1}, {1, 1, 1}, env);
  CHECK(d[0] == doctest::Approx(2.0));
  CHECK(d[1] == doctest::Approx(0.0));
  CHECK(d[2] == doctest::Approx(1.0));
  d = disturbed_rhs(0.0, at_theta(0), {0, 1}, {-1, -1, -1}, env);
  CHECK(d[0] == doctest::Approx(0.0));
  CHECK(d[2] == doctest::Approx(-1.0));
}

TEST_CASE("disturbance signals are piecewise constant") {
  const DisturbanceSignal s({0.5}, {{1, 0, 0}, {-1, 0, 1}});
  CHECK(s(0.2)[0] == 1.0);
  CHECK(s(0.5)[0] == -1.0);
  CHECK(s(0.9)[2] == 1.0);
  CHECK(DisturbanceSignal::constant({0.1, 0.2, 0.3})(7.0)[1] == 0.2);
}

TEST_CASE("error bound holds when tracking starts perfectly") {
  const auto env = error_envelope_default();
  const auto r = validate_error_bound(TrajParams{0.3, 0.6}, {0, 0, 0, 0.3, 0.6}, 1.0, env);
  CHECK(r.worst() <= 1e-12);
}

TEST_CASE("error bound on the braking and sign-flip scenario") {
  const auto env = error_envelope_default();
  ParamSchedule sched;
  sched.starts = {0.0, 1.0};
  sched.params = {{0.5, 1.0}, {-0.5, 0.0}};
  // holds until the last sample before the envelope reaches zero
  const auto r = validate_error_bound(sched, {0, 0, 0, 0.0, 1.0}, 1.99, env);
  CHECK(r.worst() <= 0.0);
  // at envelope time 1 the bound is exactly zero while the speed error is
  // still e^-10 (rate-10 decay from a 1 m/s step)
  const auto end = validate_error_bound(sched, {0, 0, 0, 0.0, 1.0}, 2.0, env);
  CHECK(end.max_violation[0] > 0.0);
  CHECK(end.max_violation[0] <= std::exp(-10.0) * 1.001);
  CHECK(end.argmax_t[0] == doctest::Approx(2.0));

  // a zero envelope cannot absorb the tracking error
  ErrorEnvelope zero({Polynomial(model_space()), Polynomial(model_space()), Polynomial(model_space())}, "zero");
  const auto bad = validate_error_bound(sched, {0, 0, 0, 0.0, 1.0}, 2.0, zero);
  CHECK(bad.worst() > 0.0);
}

TEST_CASE("parameter schedule lookup") {
  ParamSchedule s;
  s.starts = {0.0, 0.5, 1.0};
  s.params = {{0, 0}, {0.1, 0}, {0.2, 0}};
  CHECK(s.segment(0.0) == 0);
  CHECK(s.segment(0.49) == 0);
  CHECK(s.segment(0.5) == 1);
  CHECK(s.segment(3.0) == 2);
}

TEST_CASE("envelope magnitude bounds the error at negative headings") {
  const auto env = error_envelope_default();
  // turning right gives th < 0 where the lateral envelope term is negative
  ParamSchedule sched;
  sched.starts = {0.0, 1.0};
  sched.params = {{-0.5, 1.0}, {-0.5, 0.0}};
  const auto r = validate_error_bound(sched, {0, 0, 0, 0.5, 0.0}, 1.99, env);
  CHECK(r.max_violation[1] <= 1e-12);
  // at the switch the lateral error is |v - k2| |sin th| with v close to 1
  const auto tr = simulate_unicycle({0, 0, 0, 0.5, 0.0}, sched, 1.0);
  const auto& s = tr.states.back();
  CHECK(s.th < -0.4);
  CHECK(std::abs(env.eval(0.0, {s.x, s.y, s.th})[1]) == doctest::Approx(std::abs(s.th - std::pow(s.th, 3) / 6)));
}
