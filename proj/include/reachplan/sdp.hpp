#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace reachplan::sdp {

/// One stored entry of a symmetric matrix: `value` sits at (p, q) and (q, p).
struct SymEntry {
  int block = 0;
  int p = 0;
  int q = 0;
  double value = 0.0;
};

struct FreeEntry {
  int var = 0;
  double value = 0.0;
};

/// Standard-form SDP over PSD blocks X_b and free variables x:
///
///   minimize    sum_b <C_b, X_b> + c^T x
///   subject to  sum_b <A_ib, X_b> + B_i x = b_i   for every row i
///               X_b PSD
///
/// Entries are stored with p <= q.
struct SdpProblem {
  struct Row {
    std::vector<SymEntry> entries;
    std::vector<FreeEntry> free;
    double rhs = 0.0;
  };

  std::vector<int> block_sizes;
  int num_free = 0;
  std::vector<Row> rows;
  std::vector<SymEntry> objective;
  std::vector<double> objective_free;

  /// Throws std::invalid_argument on malformed data.
  void validate() const;
  std::size_t num_rows() const { return rows.size(); }

  void write_text(std::ostream& os) const;
  static SdpProblem read_text(std::istream& is);
};

enum class Status { optimal, infeasible_certificate, unbounded_certificate, max_iterations, numerical_failure };

std::string to_string(Status s);

struct SolverOptions {
  double tol_primal = 1e-7;
  double tol_dual = 1e-7;
  double tol_gap = 1e-7;
  double tol_infeasible = 1e-8;
  int max_iterations = 200;
  double step_fraction = 0.98;
  double regularization = 1e-10;
  double rank_tolerance = 1e-10;
  /// Per-iteration residual log as CSV, nullptr to disable.
  std::ostream* log = nullptr;
};

struct SdpSolution {
  Status status = Status::numerical_failure;
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::MatrixXd> S;
  Eigen::VectorXd x_free;
  Eigen::VectorXd y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;  // relative
  double dual_infeasibility = 0.0;    // relative
  double gap = 0.0;                   // relative
  int iterations = 0;
  int removed_rows = 0;
};

SdpSolution solve(const SdpProblem& problem, const SolverOptions& options = {});

/// sum_b <A_ib, X_b> + B_i x - b_i for every row.
Eigen::VectorXd equality_residual(const SdpProblem& problem, const std::vector<Eigen::MatrixXd>& X,
                                  const Eigen::VectorXd& x_free);

double primal_objective(const SdpProblem& problem, const std::vector<Eigen::MatrixXd>& X,
                        const Eigen::VectorXd& x_free);

}  // namespace reachplan::sdp
