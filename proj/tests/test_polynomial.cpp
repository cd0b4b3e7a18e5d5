#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "reachplan/polynomial.hpp"

using namespace reachplan::poly;

namespace {

Polynomial random_poly(const VariableSpace& sp, int deg, std::mt19937_64& rng, int terms = 8) {
  std::uniform_int_distribution<int> e(0, deg);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  Polynomial p(sp);
  for (int t = 0; t < terms; ++t) {
    Exponent ex(sp.count(), 0);
    int left = e(rng);
    for (std::size_t i = 0; i < sp.count() && left > 0; ++i) {
      const int k = std::uniform_int_distribution<int>(0, left)(rng);
      ex[i] = k;
      left -= k;
    }
    p = p + Polynomial(sp, {{ex, c(rng)}});
  }
  return p;
}

}  // namespace

TEST_CASE("evaluation examples") {
  const VariableSpace sp({"x", "y"});
  const auto x = Polynomial::variable(sp, "x"), y = Polynomial::variable(sp, "y");
  const std::array<double, 2> a{3.0, 0.0}, b{1.0, 2.0};
  CHECK((x * x).eval(a) == 9.0);
  CHECK(Polynomial::constant(sp, 1.0).eval(b) == 1.0);
  CHECK((2.0 * x * y + y.pow(3)).eval(b) == 12.0);
}

TEST_CASE("arithmetic and derivative examples") {
  const VariableSpace sp({"x", "y"});
  const auto x = Polynomial::variable(sp, "x"), y = Polynomial::variable(sp, "y");
  CHECK((x * x * y).partial("x").max_coeff_diff(2.0 * x * y) == 0.0);
  CHECK(((x + 1.0) * (x - 1.0)).max_coeff_diff(x * x - 1.0) == 0.0);
  const auto z = (x * x).scale(0.0);
  CHECK(z.is_zero());
  CHECK(z.terms().empty());
}

TEST_CASE("graded lexicographic order") {
  const auto m = monomials_up_to(2, 2);
  // ascending: 1, y, x, y^2, xy, x^2
  const std::vector<Exponent> expect{{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
  CHECK(m == expect);
  CHECK(monomials_up_to(6, 6).size() == 924);
}

TEST_CASE("box moments") {
  const VariableSpace s1({"z"});
  const auto m1 = box_moments(s1, Box({{-1.0, 1.0}}), 4);
  CHECK(m1.at({2}) == doctest::Approx(2.0 / 3.0));
  CHECK(m1.at({1}) == doctest::Approx(0.0));
  const VariableSpace s2({"x", "y"});
  const auto m2 = box_moments(s2, Box({{0.0, 2.0}, {0.0, 1.0}}), 2);
  CHECK(m2.at({1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("box moments agree with Monte-Carlo integration") {
  const VariableSpace sp({"a", "b", "c"});
  const Box box({{-0.5, 1.0}, {0.0, 2.0}, {-1.0, -0.2}});
  const auto mom = box_moments(sp, box, 6);
  std::mt19937_64 rng(5);
  std::vector<std::uniform_real_distribution<double>> U;
  for (const auto& iv : box.intervals()) U.emplace_back(iv.lo, iv.hi);
  const int n = 1000000;
  std::vector<std::array<double, 3>> pts(n);
  for (auto& p : pts)
    for (int i = 0; i < 3; ++i) p[static_cast<std::size_t>(i)] = U[static_cast<std::size_t>(i)](rng);
  for (const Exponent& a : std::vector<Exponent>{{2, 0, 0}, {1, 2, 3}, {0, 0, 5}, {3, 3, 0}, {1, 1, 1}}) {
    double s = 0.0, s2 = 0.0;
    for (const auto& p : pts) {
      double v = box.volume();
      for (int i = 0; i < 3; ++i) v *= std::pow(p[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(i)]);
      s += v;
      s2 += v * v;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mom.at(a) - mean) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("affine substitution examples and round trip") {
  const VariableSpace sp({"x"});
  const auto x = Polynomial::variable(sp, "x");
  const std::vector<AffineMap> m{{2.0, 1.0}};
  CHECK(x.affine_substitute(m).max_coeff_diff(2.0 * x + 1.0) == 0.0);
  const std::vector<AffineMap> id{{1.0, 0.0}};
  CHECK((x * x).affine_substitute(id).max_coeff_diff(x * x) == 0.0);

  std::mt19937_64 rng(9);
  const VariableSpace sp3({"a", "b", "c"});
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_poly(sp3, 6, rng);
    std::uniform_real_distribution<double> s(0.3, 2.0), o(-1.0, 1.0);
    std::vector<AffineMap> maps, inv;
    for (int i = 0; i < 3; ++i) {
      maps.push_back({s(rng), o(rng)});
      inv.push_back(maps.back().inverse());
    }
    const auto back = p.affine_substitute(maps).affine_substitute(inv);
    CHECK(back.max_coeff_diff(p) <= 1e-12 * (1.0 + 50.0));
  }
}

TEST_CASE("ring homomorphism and derivatives on random inputs") {
  std::mt19937_64 rng(21);
  const VariableSpace sp({"u", "v", "w", "t"});
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_poly(sp, 5, rng), q = random_poly(sp, 4, rng);
    const std::array<double, 4> z{U(rng), U(rng), U(rng), U(rng)};
    const double pv = p.eval(z), qv = q.eval(z);
    CHECK((p + q).eval(z) == doctest::Approx(pv + qv).epsilon(1e-10));
    CHECK((p * q).eval(z) == doctest::Approx(pv * qv).epsilon(1e-10));
    CHECK(CompiledPolynomial(p)(z) == doctest::Approx(pv).epsilon(1e-12));
    for (std::size_t i = 0; i < 4; ++i) {
      const double h = 1e-5;
      auto zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double fd = (p.eval(zp) - p.eval(zm)) / (2 * h);
      CHECK(p.partial(i).eval(z) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("fixing variables and re-embedding") {
  const VariableSpace sp({"x", "y", "z"});
  const auto x = Polynomial::variable(sp, "x"), y = Polynomial::variable(sp, "y"), z = Polynomial::variable(sp, "z");
  const auto p = x * y + z * z * x + 3.0;
  const auto f = p.fix({{0, 2.0}});
  const std::array<double, 3> pt{7.0, 0.5, -1.0};
  CHECK(f.eval(pt) == doctest::Approx(2.0 * 0.5 + 2.0 + 3.0));
  CHECK(f.degree_in(0) == 0);
  const VariableSpace yz({"y", "z"});
  const auto g = f.reembed(yz);
  const std::array<double, 2> q{0.5, -1.0};
  CHECK(g.eval(q) == doctest::Approx(6.0));
  CHECK_THROWS(p.reembed(yz));
}

TEST_CASE("json round trip is exact") {
  std::mt19937_64 rng(4);
  const VariableSpace sp({"a", "b"});
  const auto p = random_poly(sp, 6, rng, 20);
  const auto back = polynomial_from_json(to_json(p));
  CHECK(back.space() == sp);
  CHECK(back.max_coeff_diff(p) == 0.0);
}

TEST_CASE("mismatched spaces are rejected") {
  const auto a = Polynomial::variable(VariableSpace({"x"}), "x");
  const auto b = Polynomial::variable(VariableSpace({"y"}), "y");
  CHECK_THROWS(a + b);
  CHECK_THROWS(Polynomial::variable(VariableSpace({"x"}), "q"));
}
