#pragma once

#include <span>
#include <string>
#include <vector>

#include "reachplan/polynomial.hpp"
#include "reachplan/sdp.hpp"

namespace reachplan::sos {

using poly::Exponent;
using poly::MomentVector;
using poly::Polynomial;
using poly::VariableSpace;

/// Polynomial whose coefficients are affine in scalar decision variables:
/// constant + sum_k x_{var_k} * poly_k.
class LinPoly {
 public:
  LinPoly() = default;
  explicit LinPoly(VariableSpace space);
  LinPoly(const Polynomial& constant);  // NOLINT: implicit lift is convenient

  const VariableSpace& space() const { return space_; }
  const Polynomial& constant() const { return constant_; }
  const std::vector<std::pair<int, Polynomial>>& terms() const { return terms_; }
  void add_term(int var, Polynomial p);

  LinPoly operator+(const LinPoly& o) const;
  LinPoly operator-(const LinPoly& o) const;
  LinPoly operator-() const;
  LinPoly operator*(const Polynomial& p) const;
  LinPoly scale(double c) const;

  /// Applies a linear map on polynomials to every piece.
  template <class F>
  LinPoly map(F&& f) const {
    LinPoly out(space_);
    out.constant_ = f(constant_);
    out.space_ = out.constant_.space();
    for (const auto& [v, p] : terms_) out.add_term(v, f(p));
    return out;
  }

  int degree() const;
  Polynomial evaluate(std::span<const double> values) const;

 private:
  VariableSpace space_;
  Polynomial constant_;
  std::vector<std::pair<int, Polynomial>> terms_;
};

/// Monomials over `vars` (indices into `space`) of degree <= d, as exponents
/// of the full space.
std::vector<Exponent> gram_basis(const VariableSpace& space, const std::vector<std::size_t>& vars, int d);

/// Unit-box generators 1 - z_i^2 for the listed variables.
std::vector<Polynomial> unit_box_generators(const VariableSpace& space, const std::vector<std::size_t>& vars);

struct ConstraintReport {
  std::string name;
  /// max |coefficient| of p - sum_j g_j s_j - s_0 at the recovered solution
  double max_residual = 0.0;
  /// smallest eigenvalue over the Gram matrices
  double min_gram_eig = 0.0;
  int gram_blocks = 0;
  int rows = 0;
};

/// Putinar-style SOS feasibility/optimization problem over decision polynomials.
class SosProgram {
 public:
  explicit SosProgram(VariableSpace space);

  const VariableSpace& space() const { return space_; }
  int num_variables() const { return num_vars_; }

  int add_variable();
  /// Decision polynomial over `vars` of total degree <= degree.
  LinPoly add_polynomial(const std::vector<std::size_t>& vars, int degree);

  /// Requires p = s_0 + sum_j s_j g_j with SOS s_j, every product of degree
  /// <= `degree` in the variables `vars`.
  void add_sos(std::string name, const LinPoly& p, const std::vector<std::size_t>& vars,
               const std::vector<Polynomial>& generators, int degree);

  /// Adds weight * integral(p) over the moments to the minimized objective.
  void minimize_integral(const LinPoly& p, const MomentVector& moments, double weight = 1.0);
  void minimize_variable(int var, double weight);

  sdp::SdpProblem compile() const;

  struct Solution {
    sdp::Status status = sdp::Status::numerical_failure;
    std::vector<double> values;
    double objective = 0.0;  // includes constant offsets
    std::vector<ConstraintReport> reports;
    sdp::SdpSolution raw;
  };
  Solution solve(const sdp::SolverOptions& options = {}) const;
  /// Solution of an already compiled problem (the problem must come from compile()).
  Solution recover(const sdp::SdpSolution& raw) const;

  int num_constraints() const { return static_cast<int>(constraints_.size()); }

 private:
  struct Constraint {
    std::string name;
    LinPoly p;
    std::vector<std::size_t> vars;
    std::vector<Polynomial> generators;
    int degree = 0;
    std::vector<std::vector<Exponent>> bases;  // [0] for s_0, then one per generator
    std::vector<int> blocks;
  };

  VariableSpace space_;
  int num_vars_ = 0;
  std::vector<Constraint> constraints_;
  std::vector<double> objective_;
  double objective_offset_ = 0.0;
  int num_blocks_ = 0;
};

}  // namespace reachplan::sos
