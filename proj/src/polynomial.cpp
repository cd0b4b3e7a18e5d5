#include "reachplan/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace reachplan::poly {

int total_degree(const Exponent& e) { return std::accumulate(e.begin(), e.end(), 0); }

bool GradedLex::operator()(const Exponent& a, const Exponent& b) const {
  const int da = total_degree(a);
  const int db = total_degree(b);
  if (da != db) return da < db;
  // Among equal degrees, x1 > x2 > ... : larger leading exponent sorts later.
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

VariableSpace::VariableSpace(std::vector<std::string> names) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw std::invalid_argument("VariableSpace: empty variable name");
    if (!seen.insert(n).second) throw std::invalid_argument("VariableSpace: duplicate variable '" + n + "'");
  }
  names_ = std::make_shared<const std::vector<std::string>>(std::move(names));
}

const std::vector<std::string>& VariableSpace::names() const {
  static const std::vector<std::string> kEmpty;
  return names_ ? *names_ : kEmpty;
}

std::size_t VariableSpace::index(const std::string& name) const {
  const auto& n = names();
  auto it = std::find(n.begin(), n.end(), name);
  if (it == n.end()) throw std::out_of_range("VariableSpace: no variable '" + name + "'");
  return static_cast<std::size_t>(it - n.begin());
}

bool VariableSpace::contains(const std::string& name) const {
  const auto& n = names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

bool VariableSpace::operator==(const VariableSpace& other) const {
  if (names_ == other.names_) return true;
  return names() == other.names();
}

namespace {

void enumerate(std::size_t n, int remaining, std::size_t var, Exponent& cur, std::vector<Exponent>& out) {
  if (var + 1 == n) {
    cur[var] = remaining;
    out.push_back(cur);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    cur[var] = k;
    enumerate(n, remaining - k, var + 1, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

std::vector<Exponent> monomials_up_to(std::size_t n, int d) {
  std::vector<Exponent> out;
  if (n == 0) {
    out.emplace_back();
    return out;
  }
  Exponent cur(n, 0);
  for (int deg = 0; deg <= d; ++deg) {
    std::vector<Exponent> level;
    enumerate(n, deg, 0, cur, level);
    std::sort(level.begin(), level.end(), GradedLex{});
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

AffineMap AffineMap::inverse() const {
  if (scale == 0.0) throw std::invalid_argument("AffineMap: zero scale is not invertible");
  return AffineMap{1.0 / scale, -offset / scale};
}

Polynomial::Polynomial(VariableSpace space) : space_(std::move(space)) {}

Polynomial::Polynomial(VariableSpace space, TermMap terms) : space_(std::move(space)) {
  for (auto& [e, c] : terms) {
    if (e.size() != space_.count()) throw std::invalid_argument("Polynomial: exponent length mismatch");
    if (std::any_of(e.begin(), e.end(), [](int a) { return a < 0; }))
      throw std::invalid_argument("Polynomial: negative exponent");
    if (c != 0.0) terms_.emplace(e, c);
  }
}

Polynomial Polynomial::constant(const VariableSpace& space, double c) {
  TermMap t;
  if (c != 0.0) t.emplace(Exponent(space.count(), 0), c);
  return Polynomial(space, std::move(t));
}

Polynomial Polynomial::variable(const VariableSpace& space, const std::string& name) {
  return variable(space, space.index(name));
}

Polynomial Polynomial::variable(const VariableSpace& space, std::size_t index) {
  if (index >= space.count()) throw std::out_of_range("Polynomial::variable: index out of range");
  Exponent e(space.count(), 0);
  e[index] = 1;
  return Polynomial(space, TermMap{{e, 1.0}});
}

int Polynomial::degree() const {
  // Graded order puts the highest degree last.
  return terms_.empty() ? 0 : total_degree(terms_.rbegin()->first);
}

int Polynomial::degree_in(std::size_t var) const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e.at(var));
  return d;
}

double Polynomial::coefficient(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::eval(std::span<const double> point) const {
  const std::size_t n = space_.count();
  if (point.size() != n)
    throw std::invalid_argument("Polynomial::eval: point has " + std::to_string(point.size()) +
                                " coordinates, space has " + std::to_string(n));
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double m = c;
    for (std::size_t i = 0; i < n; ++i) {
      for (int k = 0; k < e[i]; ++k) m *= point[i];
    }
    sum += m;
  }
  return sum;
}

void Polynomial::require_same_space(const Polynomial& o, const char* op) const {
  if (space_ != o.space_) throw std::invalid_argument(std::string("Polynomial ") + op + ": variable space mismatch");
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  require_same_space(o, "add");
  TermMap t = terms_;
  for (const auto& [e, c] : o.terms_) {
    auto [it, inserted] = t.emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) t.erase(it);
    }
  }
  Polynomial r(space_);
  r.terms_ = std::move(t);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + (-o); }

Polynomial Polynomial::operator-() const { return scale(-1.0); }

Polynomial Polynomial::operator+(double c) const { return *this + constant(space_, c); }

Polynomial Polynomial::operator-(double c) const { return *this + constant(space_, -c); }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  require_same_space(o, "mul");
  TermMap t;
  const std::size_t n = space_.count();
  Exponent e(n);
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : o.terms_) {
      for (std::size_t i = 0; i < n; ++i) e[i] = ea[i] + eb[i];
      t[e] += ca * cb;
    }
  }
  std::erase_if(t, [](const auto& kv) { return kv.second == 0.0; });
  Polynomial r(space_);
  r.terms_ = std::move(t);
  return r;
}

Polynomial Polynomial::scale(double c) const {
  Polynomial r(space_);
  if (c == 0.0) return r;
  for (const auto& [e, v] : terms_) r.terms_.emplace_hint(r.terms_.end(), e, v * c);
  return r;
}

Polynomial Polynomial::pow(int k) const {
  if (k < 0) throw std::invalid_argument("Polynomial::pow: negative power");
  Polynomial r = constant(space_, 1.0);
  for (int i = 0; i < k; ++i) r = r * *this;
  return r;
}

Polynomial operator*(double c, const Polynomial& p) { return p.scale(c); }

Polynomial Polynomial::partial(std::size_t var) const {
  if (var >= space_.count()) throw std::out_of_range("Polynomial::partial: variable index out of range");
  TermMap t;
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponent d = e;
    d[var] -= 1;
    t.emplace(std::move(d), c * e[var]);
  }
  return Polynomial(space_, std::move(t));
}

Polynomial Polynomial::affine_substitute(std::span<const AffineMap> maps) const {
  const std::size_t n = space_.count();
  if (maps.size() != n) throw std::invalid_argument("affine_substitute: need one map per variable");
  for (const auto& m : maps)
    if (m.scale == 0.0) throw std::invalid_argument("affine_substitute: zero scale factor");

  // powers[i][k] = (a_i z_i + b_i)^k
  std::vector<std::vector<Polynomial>> powers(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int dmax = degree_in(i);
    const Polynomial lin = variable(space_, i).scale(maps[i].scale) + maps[i].offset;
    powers[i].push_back(constant(space_, 1.0));
    for (int k = 1; k <= dmax; ++k) powers[i].push_back(powers[i].back() * lin);
  }
  Polynomial out(space_);
  for (const auto& [e, c] : terms_) {
    Polynomial term = constant(space_, c);
    for (std::size_t i = 0; i < n; ++i)
      if (e[i] > 0) term = term * powers[i][e[i]];
    out = out + term;
  }
  return out;
}

Polynomial Polynomial::fix(const std::vector<std::pair<std::size_t, double>>& values) const {
  TermMap t;
  for (const auto& [e, c] : terms_) {
    Exponent r = e;
    double m = c;
    for (const auto& [var, val] : values) {
      for (int k = 0; k < e.at(var); ++k) m *= val;
      r[var] = 0;
    }
    t[r] += m;
  }
  return Polynomial(space_, std::move(t));
}

Polynomial Polynomial::reembed(const VariableSpace& target) const {
  const std::size_t n = space_.count();
  std::vector<std::ptrdiff_t> where(n, -1);
  for (std::size_t i = 0; i < n; ++i)
    if (target.contains(space_.name(i))) where[i] = static_cast<std::ptrdiff_t>(target.index(space_.name(i)));
  TermMap t;
  for (const auto& [e, c] : terms_) {
    Exponent r(target.count(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (e[i] == 0) continue;
      if (where[i] < 0) throw std::invalid_argument("reembed: variable '" + space_.name(i) + "' missing in target");
      r[static_cast<std::size_t>(where[i])] = e[i];
    }
    t[r] += c;
  }
  return Polynomial(target, std::move(t));
}

double Polynomial::max_coeff_diff(const Polynomial& o) const {
  require_same_space(o, "compare");
  double m = 0.0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c - o.coefficient(e)));
  for (const auto& [e, c] : o.terms_)
    if (!terms_.contains(e)) m = std::max(m, std::abs(c));
  return m;
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p) : n_(p.space().count()), max_deg_(0) {
  coef_.reserve(p.terms().size());
  exps_.reserve(p.terms().size() * n_);
  for (const auto& [e, c] : p.terms()) {
    coef_.push_back(c);
    for (int a : e) {
      exps_.push_back(a);
      max_deg_ = std::max(max_deg_, a);
    }
  }
}

double CompiledPolynomial::operator()(std::span<const double> point) const {
  if (point.size() != n_) throw std::invalid_argument("CompiledPolynomial: dimension mismatch");
  constexpr int kMaxDeg = 16;
  constexpr std::size_t kMaxVars = 8;
  if (max_deg_ >= kMaxDeg || n_ > kMaxVars) {
    double sum = 0.0;
    for (std::size_t t = 0; t < coef_.size(); ++t) {
      double m = coef_[t];
      for (std::size_t i = 0; i < n_; ++i) m *= std::pow(point[i], exps_[t * n_ + i]);
      sum += m;
    }
    return sum;
  }
  double pw[kMaxVars][kMaxDeg];
  for (std::size_t i = 0; i < n_; ++i) {
    pw[i][0] = 1.0;
    for (int k = 1; k <= max_deg_; ++k) pw[i][k] = pw[i][k - 1] * point[i];
  }
  double sum = 0.0;
  const int* e = exps_.data();
  for (std::size_t t = 0; t < coef_.size(); ++t, e += n_) {
    double m = coef_[t];
    for (std::size_t i = 0; i < n_; ++i) m *= pw[i][e[i]];
    sum += m;
  }
  return sum;
}

Box::Box(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  for (const auto& iv : intervals_) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi))
      throw std::invalid_argument("Box: every interval needs finite lo < hi");
  }
}

double Box::volume() const {
  double v = 1.0;
  for (const auto& iv : intervals_) v *= iv.width();
  return v;
}

bool Box::contains(std::span<const double> point) const {
  if (point.size() != intervals_.size()) return false;
  for (std::size_t i = 0; i < point.size(); ++i)
    if (!intervals_[i].contains(point[i])) return false;
  return true;
}

std::vector<AffineMap> Box::from_unit() const {
  std::vector<AffineMap> maps;
  maps.reserve(intervals_.size());
  for (const auto& iv : intervals_) maps.push_back({0.5 * iv.width(), iv.center()});
  return maps;
}

double MomentVector::at(const Exponent& e) const {
  auto it = values.find(e);
  if (it == values.end()) throw std::out_of_range("MomentVector: exponent beyond degree bound");
  return it->second;
}

double MomentVector::integrate(const Polynomial& p) const {
  if (p.space() != space) throw std::invalid_argument("MomentVector::integrate: space mismatch");
  double s = 0.0;
  for (const auto& [e, c] : p.terms()) s += c * at(e);
  return s;
}

MomentVector box_moments(const VariableSpace& space, const Box& box, int degree) {
  if (degree < 0) throw std::invalid_argument("box_moments: negative degree");
  if (box.dim() != space.count()) throw std::invalid_argument("box_moments: box dimension mismatch");
  const std::size_t n = space.count();
  // one[i][a] = integral of z^a over the i-th interval
  std::vector<std::vector<double>> one(n, std::vector<double>(static_cast<std::size_t>(degree) + 1));
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = box[i].lo, hi = box[i].hi;
    double plo = lo, phi = hi;
    for (int a = 0; a <= degree; ++a) {
      one[i][static_cast<std::size_t>(a)] = (phi - plo) / (a + 1);
      plo *= lo;
      phi *= hi;
    }
  }
  MomentVector mv{space, degree, {}};
  for (const auto& e : monomials_up_to(n, degree)) {
    double y = 1.0;
    for (std::size_t i = 0; i < n; ++i) y *= one[i][static_cast<std::size_t>(e[i])];
    mv.values.emplace(e, y);
  }
  return mv;
}

nlohmann::json to_json(const Polynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [e, c] : p.terms()) terms.push_back({{"exp", e}, {"coef", c}});
  return {{"variables", p.space().names()}, {"terms", std::move(terms)}};
}

Polynomial polynomial_from_json(const nlohmann::json& j) {
  VariableSpace space(j.at("variables").get<std::vector<std::string>>());
  Polynomial::TermMap t;
  for (const auto& term : j.at("terms")) {
    auto e = term.at("exp").get<Exponent>();
    t[e] += term.at("coef").get<double>();
  }
  return Polynomial(space, std::move(t));
}

}  // namespace reachplan::poly
