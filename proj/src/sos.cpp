#include "reachplan/sos.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace reachplan::sos {

LinPoly::LinPoly(VariableSpace space) : space_(space), constant_(std::move(space)) {}

LinPoly::LinPoly(const Polynomial& constant) : space_(constant.space()), constant_(constant) {}

void LinPoly::add_term(int var, Polynomial p) {
  if (p.space() != space_) throw std::invalid_argument("LinPoly: variable space mismatch");
  if (!p.is_zero()) terms_.emplace_back(var, std::move(p));
}

LinPoly LinPoly::operator+(const LinPoly& o) const {
  LinPoly out = *this;
  out.constant_ = constant_ + o.constant_;
  for (const auto& [v, p] : o.terms_) out.add_term(v, p);
  return out;
}

LinPoly LinPoly::operator-(const LinPoly& o) const { return *this + (-o); }

LinPoly LinPoly::operator-() const { return scale(-1.0); }

LinPoly LinPoly::operator*(const Polynomial& p) const {
  return map([&](const Polynomial& q) { return q * p; });
}

LinPoly LinPoly::scale(double c) const {
  return map([&](const Polynomial& q) { return q.scale(c); });
}

int LinPoly::degree() const {
  int d = constant_.is_zero() ? -1 : constant_.degree();
  for (const auto& t : terms_) d = std::max(d, t.second.degree());
  return d;
}

Polynomial LinPoly::evaluate(std::span<const double> values) const {
  Polynomial out = constant_;
  for (const auto& [v, p] : terms_) out = out + p.scale(values[static_cast<std::size_t>(v)]);
  return out;
}

std::vector<Exponent> gram_basis(const VariableSpace& space, const std::vector<std::size_t>& vars, int d) {
  std::vector<Exponent> out;
  if (d < 0) return out;
  for (const auto& e : poly::monomials_up_to(vars.size(), d)) {
    Exponent full(space.count(), 0);
    for (std::size_t i = 0; i < vars.size(); ++i) full[vars[i]] = e[i];
    out.push_back(std::move(full));
  }
  return out;
}

std::vector<Polynomial> unit_box_generators(const VariableSpace& space, const std::vector<std::size_t>& vars) {
  std::vector<Polynomial> out;
  for (auto v : vars) {
    const auto z = Polynomial::variable(space, v);
    out.push_back(Polynomial::constant(space, 1.0) - z * z);
  }
  return out;
}

SosProgram::SosProgram(VariableSpace space) : space_(std::move(space)) {}

int SosProgram::add_variable() {
  objective_.push_back(0.0);
  return num_vars_++;
}

LinPoly SosProgram::add_polynomial(const std::vector<std::size_t>& vars, int degree) {
  LinPoly out(space_);
  for (const auto& e : gram_basis(space_, vars, degree)) {
    Polynomial::TermMap t;
    t[e] = 1.0;
    out.add_term(add_variable(), Polynomial(space_, std::move(t)));
  }
  return out;
}

void SosProgram::add_sos(std::string name, const LinPoly& p, const std::vector<std::size_t>& vars,
                         const std::vector<Polynomial>& generators, int degree) {
  if (p.space() != space_) throw std::invalid_argument("add_sos: variable space mismatch");
  Constraint c;
  c.name = std::move(name);
  c.p = p;
  c.vars = vars;
  c.generators = generators;
  c.degree = degree;
  if (p.degree() > degree) throw std::invalid_argument("add_sos(" + c.name + "): polynomial degree exceeds the relaxation degree");
  c.bases.push_back(gram_basis(space_, vars, degree / 2));
  for (const auto& g : generators) {
    if (g.space() != space_) throw std::invalid_argument("add_sos: generator space mismatch");
    c.bases.push_back(gram_basis(space_, vars, (degree - g.degree()) / 2));
  }
  for (const auto& b : c.bases) c.blocks.push_back(b.empty() ? -1 : num_blocks_++);
  constraints_.push_back(std::move(c));
}

void SosProgram::minimize_integral(const LinPoly& p, const MomentVector& moments, double weight) {
  objective_offset_ += weight * moments.integrate(p.constant());
  for (const auto& [v, q] : p.terms()) objective_[static_cast<std::size_t>(v)] += weight * moments.integrate(q);
}

void SosProgram::minimize_variable(int var, double weight) { objective_.at(static_cast<std::size_t>(var)) += weight; }

namespace {

Exponent add_exp(const Exponent& a, const Exponent& b) {
  Exponent r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

bool inside(const Exponent& e, const std::vector<bool>& allowed) {
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] != 0 && !allowed[i]) return false;
  return true;
}

}  // namespace

sdp::SdpProblem SosProgram::compile() const {
  sdp::SdpProblem P;
  P.num_free = num_vars_;
  P.objective_free = objective_;
  for (const auto& c : constraints_)
    for (std::size_t k = 0; k < c.bases.size(); ++k)
      if (c.blocks[k] >= 0) P.block_sizes.push_back(static_cast<int>(c.bases[k].size()));

  for (const auto& c : constraints_) {
    std::vector<bool> allowed(space_.count(), false);
    for (auto v : c.vars) allowed[v] = true;
    const auto monos = gram_basis(space_, c.vars, c.degree);
    std::map<Exponent, int, poly::GradedLex> row_of;
    const int first = static_cast<int>(P.rows.size());
    for (std::size_t i = 0; i < monos.size(); ++i) row_of[monos[i]] = first + static_cast<int>(i);
    P.rows.resize(P.rows.size() + monos.size());
    auto row_at = [&](const Exponent& e) -> sdp::SdpProblem::Row& {
      auto it = row_of.find(e);
      if (it == row_of.end() || !inside(e, allowed))
        throw std::invalid_argument("add_sos(" + c.name + "): monomial outside the constraint variables or degree");
      return P.rows[static_cast<std::size_t>(it->second)];
    };

    // p = sum Gram terms  <=>  sum Gram terms - (linear part of p) = constant part of p
    for (const auto& [e, coef] : c.p.constant().terms()) row_at(e).rhs += coef;
    for (const auto& [v, q] : c.p.terms())
      for (const auto& [e, coef] : q.terms()) row_at(e).free.push_back({v, -coef});

    for (std::size_t k = 0; k < c.bases.size(); ++k) {
      if (c.blocks[k] < 0) continue;
      const auto& basis = c.bases[k];
      const Polynomial mult = k == 0 ? Polynomial::constant(space_, 1.0) : c.generators[k - 1];
      for (std::size_t p = 0; p < basis.size(); ++p)
        for (std::size_t q = p; q < basis.size(); ++q) {
          const Exponent pq = add_exp(basis[p], basis[q]);
          for (const auto& [g, gc] : mult.terms())
            row_at(add_exp(pq, g)).entries.push_back({c.blocks[k], static_cast<int>(p), static_cast<int>(q), gc});
        }
    }
  }
  return P;
}

SosProgram::Solution SosProgram::solve(const sdp::SolverOptions& options) const {
  return recover(sdp::solve(compile(), options));
}

SosProgram::Solution SosProgram::recover(const sdp::SdpSolution& raw) const {
  Solution sol;
  sol.status = raw.status;
  sol.raw = raw;
  sol.values.assign(static_cast<std::size_t>(num_vars_), 0.0);
  for (int j = 0; j < num_vars_ && j < raw.x_free.size(); ++j) sol.values[static_cast<std::size_t>(j)] = raw.x_free(j);
  sol.objective = objective_offset_;
  for (int j = 0; j < num_vars_; ++j) sol.objective += objective_[static_cast<std::size_t>(j)] * sol.values[static_cast<std::size_t>(j)];
  if (raw.X.empty()) return sol;

  for (const auto& c : constraints_) {
    ConstraintReport rep;
    rep.name = c.name;
    rep.min_gram_eig = std::numeric_limits<double>::infinity();
    Polynomial rest = c.p.evaluate(sol.values);
    for (std::size_t k = 0; k < c.bases.size(); ++k) {
      if (c.blocks[k] < 0) continue;
      ++rep.gram_blocks;
      const auto& Q = raw.X[static_cast<std::size_t>(c.blocks[k])];
      rep.min_gram_eig = std::min(
          rep.min_gram_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q, Eigen::EigenvaluesOnly).eigenvalues().minCoeff());
      const auto& basis = c.bases[k];
      Polynomial::TermMap t;
      for (std::size_t p = 0; p < basis.size(); ++p)
        for (std::size_t q = 0; q < basis.size(); ++q)
          t[add_exp(basis[p], basis[q])] += Q(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
      Polynomial s(space_, std::move(t));
      if (k > 0) s = s * c.generators[k - 1];
      rest = rest - s;
    }
    for (const auto& [e, coef] : rest.terms()) rep.max_residual = std::max(rep.max_residual, std::abs(coef));
    rep.rows = static_cast<int>(gram_basis(space_, c.vars, c.degree).size());
    sol.reports.push_back(rep);
  }
  return sol;
}

}  // namespace reachplan::sos
