#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace reachplan::poly {

/// Exponent multi-index; one entry per variable of the owning space.
using Exponent = std::vector<int>;

int total_degree(const Exponent& e);

/// Graded lexicographic order: lower total degree first, then
/// lexicographic with the first variable most significant.
struct GradedLex {
  bool operator()(const Exponent& a, const Exponent& b) const;
};

/// Ordered, immutable list of variable names. Copies share storage.
class VariableSpace {
 public:
  VariableSpace() = default;
  explicit VariableSpace(std::vector<std::string> names);

  std::size_t count() const { return names_ ? names_->size() : 0; }
  const std::vector<std::string>& names() const;
  const std::string& name(std::size_t i) const { return names().at(i); }
  /// Index of a named variable; throws std::out_of_range when absent.
  std::size_t index(const std::string& name) const;
  bool contains(const std::string& name) const;

  bool operator==(const VariableSpace& other) const;
  bool operator!=(const VariableSpace& other) const { return !(*this == other); }

 private:
  std::shared_ptr<const std::vector<std::string>> names_;
};

/// All exponents of total degree <= d over n variables, in graded-lex order.
std::vector<Exponent> monomials_up_to(std::size_t n, int d);

/// Per-variable affine change of coordinates x_i <- scale_i * z_i + offset_i.
struct AffineMap {
  double scale = 1.0;
  double offset = 0.0;

  double apply(double z) const { return scale * z + offset; }
  AffineMap inverse() const;
};

/// Sparse multivariate polynomial with double coefficients.
class Polynomial {
 public:
  using TermMap = std::map<Exponent, double, GradedLex>;

  Polynomial() = default;
  explicit Polynomial(VariableSpace space);
  Polynomial(VariableSpace space, TermMap terms);

  static Polynomial constant(const VariableSpace& space, double c);
  static Polynomial variable(const VariableSpace& space, const std::string& name);
  static Polynomial variable(const VariableSpace& space, std::size_t index);

  const VariableSpace& space() const { return space_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  /// Largest exponent of variable `var` over all terms.
  int degree_in(std::size_t var) const;
  double coefficient(const Exponent& e) const;

  double eval(std::span<const double> point) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator-() const;
  Polynomial operator+(double c) const;
  Polynomial operator-(double c) const;
  Polynomial scale(double c) const;
  Polynomial pow(int k) const;

  Polynomial partial(std::size_t var) const;
  Polynomial partial(const std::string& var) const { return partial(space_.index(var)); }

  /// Composition with per-variable affine maps (one per variable).
  Polynomial affine_substitute(std::span<const AffineMap> maps) const;

  /// Fix the listed variables to values; result stays in the same space with
  /// zero exponents on the fixed variables.
  Polynomial fix(const std::vector<std::pair<std::size_t, double>>& values) const;

  /// Re-express over another space. Every variable carrying a nonzero
  /// exponent must exist in `target`.
  Polynomial reembed(const VariableSpace& target) const;

  /// Coefficient-wise max-norm of the difference.
  double max_coeff_diff(const Polynomial& o) const;

 private:
  void require_same_space(const Polynomial& o, const char* op) const;

  VariableSpace space_;
  TermMap terms_;
};

Polynomial operator*(double c, const Polynomial& p);

/// Flattened polynomial for repeated evaluation in inner loops.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p);

  std::size_t arity() const { return n_; }
  double operator()(std::span<const double> point) const;

 private:
  std::size_t n_ = 0;
  int max_deg_ = 0;
  std::vector<double> coef_;
  std::vector<int> exps_;  // row-major, n_ per term
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Axis-aligned box; one closed interval per variable.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> intervals);

  std::size_t dim() const { return intervals_.size(); }
  const Interval& operator[](std::size_t i) const { return intervals_.at(i); }
  const std::vector<Interval>& intervals() const { return intervals_; }
  double volume() const;
  bool contains(std::span<const double> point) const;

  /// Maps from the unit box [-1,1]^n onto this box.
  std::vector<AffineMap> from_unit() const;

 private:
  std::vector<Interval> intervals_;
};

/// Lebesgue moments y_a = integral over the box of z^a, for all |a| <= degree.
struct MomentVector {
  VariableSpace space;
  int degree = 0;
  std::map<Exponent, double, GradedLex> values;

  double at(const Exponent& e) const;
  /// Integral of p over the box (p must have degree <= `degree`).
  double integrate(const Polynomial& p) const;
};

MomentVector box_moments(const VariableSpace& space, const Box& box, int degree);

nlohmann::json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const nlohmann::json& j);

}  // namespace reachplan::poly
