#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "reachplan/sos.hpp"

using namespace reachplan;
using poly::Polynomial;
using poly::VariableSpace;

namespace {

double grid_min_1d(const Polynomial& p, double lo, double hi, int n) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double x = lo + (hi - lo) * i / n;
    best = std::min(best, p.eval(std::vector<double>{x}));
  }
  return best;
}

}  // namespace

TEST_CASE("global lower bound of a univariate quartic is tight") {
  const VariableSpace sp({"x"});
  const auto x = Polynomial::variable(sp, "x");
  const Polynomial p = x.pow(4) - 3.0 * x * x + 1.0;
  sos::SosProgram prog(sp);
  const int g = prog.add_variable();
  sos::LinPoly lhs(p);
  lhs.add_term(g, Polynomial::constant(sp, -1.0));
  prog.add_sos("p-g", lhs, {0}, {}, 4);
  prog.minimize_variable(g, -1.0);
  const auto s = prog.solve();
  REQUIRE(s.status == sdp::Status::optimal);
  const double oracle = grid_min_1d(p, -3.0, 3.0, 600000);
  CHECK(s.values[0] == doctest::Approx(oracle).epsilon(1e-5));
  REQUIRE(s.reports.size() == 1);
  CHECK(s.reports[0].max_residual < 1e-6);
  CHECK(s.reports[0].min_gram_eig > -1e-7);
}

TEST_CASE("box generator certifies the minimum of x on [-1, 1]") {
  const VariableSpace sp({"x"});
  const auto x = Polynomial::variable(sp, "x");
  sos::SosProgram prog(sp);
  const int g = prog.add_variable();
  sos::LinPoly lhs(x);
  lhs.add_term(g, Polynomial::constant(sp, -1.0));
  prog.add_sos("x-g", lhs, {0}, sos::unit_box_generators(sp, {0}), 2);
  prog.minimize_variable(g, -1.0);
  const auto s = prog.solve();
  REQUIRE(s.status == sdp::Status::optimal);
  CHECK(s.values[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(s.reports[0].gram_blocks == 2);
}

TEST_CASE("bivariate bound on a box is below and near the sampled minimum") {
  const VariableSpace sp({"x", "y"});
  const auto x = Polynomial::variable(sp, "x");
  const auto y = Polynomial::variable(sp, "y");
  const Polynomial p = (x - 0.3).pow(2) + (y + 0.2).pow(2) + x * x * y * y - 0.5 * x * y;
  sos::SosProgram prog(sp);
  const int g = prog.add_variable();
  sos::LinPoly lhs(p);
  lhs.add_term(g, Polynomial::constant(sp, -1.0));
  prog.add_sos("p-g", lhs, {0, 1}, sos::unit_box_generators(sp, {0, 1}), 4);
  prog.minimize_variable(g, -1.0);
  const auto s = prog.solve();
  REQUIRE(s.status == sdp::Status::optimal);
  double oracle = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j <= 400; ++j) {
      const std::vector<double> pt{-1.0 + i / 200.0, -1.0 + j / 200.0};
      oracle = std::min(oracle, p.eval(pt));
    }
  CHECK(s.values[0] <= oracle + 1e-6);
  CHECK(s.values[0] >= oracle - 1e-3);
}

TEST_CASE("the Motzkin polynomial has no SOS decomposition") {
  const VariableSpace sp({"x", "y"});
  const auto x = Polynomial::variable(sp, "x");
  const auto y = Polynomial::variable(sp, "y");
  const Polynomial m = x.pow(4) * y * y + x * x * y.pow(4) - 3.0 * x * x * y * y + 1.0;
  sos::SosProgram prog(sp);
  prog.add_sos("motzkin", sos::LinPoly(m), {0, 1}, {}, 6);
  const auto s = prog.solve();
  CHECK(s.status != sdp::Status::optimal);
}

TEST_CASE("decision polynomial fit with integral objective") {
  // minimize integral of w over [-1,1] with w >= x^2 on [-1,1], w of degree 2:
  // the optimum is w = x^2 with integral 2/3.
  const VariableSpace sp({"x"});
  const auto x = Polynomial::variable(sp, "x");
  sos::SosProgram prog(sp);
  const auto w = prog.add_polynomial({0}, 2);
  prog.add_sos("w-x2", w - sos::LinPoly(x * x), {0}, sos::unit_box_generators(sp, {0}), 2);
  const auto mom = poly::box_moments(sp, poly::Box({{-1.0, 1.0}}), 2);
  prog.minimize_integral(w, mom);
  const auto s = prog.solve();
  REQUIRE(s.status == sdp::Status::optimal);
  CHECK(s.objective == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  const auto wv = w.evaluate(s.values);
  CHECK(wv.max_coeff_diff(x * x) < 1e-5);
}

TEST_CASE("monomials outside the constraint variables are rejected") {
  const VariableSpace sp({"x", "y"});
  const auto y = Polynomial::variable(sp, "y");
  sos::SosProgram prog(sp);
  prog.add_sos("bad", sos::LinPoly(y * y), {0}, {}, 2);
  CHECK_THROWS_AS(prog.compile(), std::invalid_argument);
}
