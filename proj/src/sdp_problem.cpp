#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "reachplan/sdp.hpp"

namespace reachplan::sdp {

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal:
      return "optimal";
    case Status::infeasible_certificate:
      return "infeasible-certificate";
    case Status::unbounded_certificate:
      return "unbounded-certificate";
    case Status::max_iterations:
      return "max-iterations";
    case Status::numerical_failure:
      return "numerical-failure";
  }
  return "unknown";
}

namespace {

void check_entry(const SdpProblem& P, const SymEntry& e, const char* where) {
  if (e.block < 0 || e.block >= static_cast<int>(P.block_sizes.size()))
    throw std::invalid_argument(std::string(where) + ": block index out of range");
  const int n = P.block_sizes[static_cast<std::size_t>(e.block)];
  if (e.p < 0 || e.q < e.p || e.q >= n) throw std::invalid_argument(std::string(where) + ": entry needs 0 <= p <= q < n");
  if (!std::isfinite(e.value)) throw std::invalid_argument(std::string(where) + ": non-finite coefficient");
}

}  // namespace

void SdpProblem::validate() const {
  for (int n : block_sizes)
    if (n <= 0) throw std::invalid_argument("SdpProblem: block sizes must be positive");
  if (num_free < 0) throw std::invalid_argument("SdpProblem: negative free-variable count");
  if (!objective_free.empty() && static_cast<int>(objective_free.size()) != num_free)
    throw std::invalid_argument("SdpProblem: objective dimension does not match free-variable count");
  for (const auto& row : rows) {
    for (const auto& e : row.entries) check_entry(*this, e, "SdpProblem row");
    for (const auto& f : row.free)
      if (f.var < 0 || f.var >= num_free) throw std::invalid_argument("SdpProblem row: free index out of range");
    if (!std::isfinite(row.rhs)) throw std::invalid_argument("SdpProblem row: non-finite rhs");
  }
  for (const auto& e : objective) check_entry(*this, e, "SdpProblem objective");
}

// Format:
//   RPSDP 1
//   blocks <nb> <n_1> ... <n_nb>
//   free <nf>
//   rows <m>
//   b <row> <value>
//   a <row> <block> <p> <q> <value>
//   f <row> <var> <value>
//   c <block> <p> <q> <value>
//   cf <var> <value>
// Indices are zero-based; a/c entries have p <= q and denote a symmetric pair.
void SdpProblem::write_text(std::ostream& os) const {
  const auto old_prec = os.precision(std::numeric_limits<double>::max_digits10);
  os << "RPSDP 1\n";
  os << "blocks " << block_sizes.size();
  for (int n : block_sizes) os << ' ' << n;
  os << "\nfree " << num_free << "\nrows " << rows.size() << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].rhs != 0.0) os << "b " << i << ' ' << rows[i].rhs << '\n';
    for (const auto& e : rows[i].entries)
      os << "a " << i << ' ' << e.block << ' ' << e.p << ' ' << e.q << ' ' << e.value << '\n';
    for (const auto& f : rows[i].free) os << "f " << i << ' ' << f.var << ' ' << f.value << '\n';
  }
  for (const auto& e : objective) os << "c " << e.block << ' ' << e.p << ' ' << e.q << ' ' << e.value << '\n';
  for (std::size_t j = 0; j < objective_free.size(); ++j)
    if (objective_free[j] != 0.0) os << "cf " << j << ' ' << objective_free[j] << '\n';
  os.precision(old_prec);
}

SdpProblem SdpProblem::read_text(std::istream& is) {
  SdpProblem P;
  std::string line;
  auto fail = [](const std::string& msg) { throw std::invalid_argument("SdpProblem::read_text: " + msg); };
  if (!std::getline(is, line) || line.rfind("RPSDP 1", 0) != 0) fail("missing header");
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "blocks") {
      std::size_t nb = 0;
      ls >> nb;
      P.block_sizes.resize(nb);
      for (auto& n : P.block_sizes) ls >> n;
    } else if (tag == "free") {
      ls >> P.num_free;
      P.objective_free.assign(static_cast<std::size_t>(P.num_free), 0.0);
    } else if (tag == "rows") {
      std::size_t m = 0;
      ls >> m;
      P.rows.resize(m);
    } else if (tag == "b") {
      std::size_t i = 0;
      ls >> i;
      if (i >= P.rows.size()) fail("row index out of range");
      ls >> P.rows[i].rhs;
    } else if (tag == "a") {
      std::size_t i = 0;
      SymEntry e;
      ls >> i >> e.block >> e.p >> e.q >> e.value;
      if (i >= P.rows.size()) fail("row index out of range");
      P.rows[i].entries.push_back(e);
    } else if (tag == "f") {
      std::size_t i = 0;
      FreeEntry f;
      ls >> i >> f.var >> f.value;
      if (i >= P.rows.size()) fail("row index out of range");
      P.rows[i].free.push_back(f);
    } else if (tag == "c") {
      SymEntry e;
      ls >> e.block >> e.p >> e.q >> e.value;
      P.objective.push_back(e);
    } else if (tag == "cf") {
      std::size_t j = 0;
      double v = 0.0;
      ls >> j >> v;
      if (j >= P.objective_free.size()) fail("free index out of range");
      P.objective_free[j] = v;
    } else {
      fail("unknown tag '" + tag + "'");
    }
    if (ls.fail()) fail("malformed line: " + line);
  }
  P.validate();
  return P;
}

Eigen::VectorXd equality_residual(const SdpProblem& P, const std::vector<Eigen::MatrixXd>& X,
                                  const Eigen::VectorXd& x_free) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(P.rows.size()));
  for (std::size_t i = 0; i < P.rows.size(); ++i) {
    double s = -P.rows[i].rhs;
    for (const auto& e : P.rows[i].entries) {
      const auto& B = X[static_cast<std::size_t>(e.block)];
      s += e.p == e.q ? e.value * B(e.p, e.p) : e.value * (B(e.p, e.q) + B(e.q, e.p));
    }
    for (const auto& f : P.rows[i].free) s += f.value * x_free(f.var);
    r(static_cast<Eigen::Index>(i)) = s;
  }
  return r;
}

double primal_objective(const SdpProblem& P, const std::vector<Eigen::MatrixXd>& X, const Eigen::VectorXd& x_free) {
  double s = 0.0;
  for (const auto& e : P.objective) {
    const auto& B = X[static_cast<std::size_t>(e.block)];
    s += e.p == e.q ? e.value * B(e.p, e.p) : e.value * (B(e.p, e.q) + B(e.q, e.p));
  }
  for (std::size_t j = 0; j < P.objective_free.size(); ++j) s += P.objective_free[j] * x_free(static_cast<Eigen::Index>(j));
  return s;
}

}  // namespace reachplan::sdp
