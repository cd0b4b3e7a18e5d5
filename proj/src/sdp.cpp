// Homogeneous self-dual primal-dual interior point method for SdpProblem.
// Nesterov-Todd scaling, Mehrotra predictor-corrector. The Schur complement
// is block diagonal over groups of rows that share no PSD block; those
// groups are factored independently and free variables are eliminated
// through B^T M^-1 B.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <Eigen/SparseCore>

#include "reachplan/sdp.hpp"

namespace reachplan::sdp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Blocks = std::vector<MatrixXd>;

double sym_inner(const std::vector<SymEntry>& entries, const Blocks& X) {
  double s = 0.0;
  for (const auto& e : entries) {
    const auto& B = X[static_cast<std::size_t>(e.block)];
    s += e.p == e.q ? e.value * B(e.p, e.p) : 2.0 * e.value * B(e.p, e.q);
  }
  return s;
}

double inner(const Blocks& A, const Blocks& B) {
  double s = 0.0;
  for (std::size_t k = 0; k < A.size(); ++k) s += A[k].cwiseProduct(B[k]).sum();
  return s;
}

double max_abs(const Blocks& A) {
  double m = 0.0;
  for (const auto& a : A)
    if (a.size() > 0) m = std::max(m, a.cwiseAbs().maxCoeff());
  return m;
}

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

// Result of the rank check on the constraint rows.
struct RowScreen {
  std::vector<int> keep;
  std::vector<int> dropped;
  bool inconsistent = false;
  VectorXd certificate;  // y over all original rows when inconsistent
};

// A row owning a cell (block entry or free column) that no other row touches
// cannot take part in a linear dependency. Only the remaining rows need a
// numerical rank test.
RowScreen screen_rows(const SdpProblem& P, double rank_tol) {
  const int m = static_cast<int>(P.rows.size());
  std::vector<std::vector<std::array<int, 3>>> cells(static_cast<std::size_t>(m));
  std::vector<std::array<int, 3>> all;
  for (int i = 0; i < m; ++i) {
    const auto& row = P.rows[static_cast<std::size_t>(i)];
    for (const auto& e : row.entries)
      if (e.value != 0.0) cells[static_cast<std::size_t>(i)].push_back({e.block, e.p, e.q});
    for (const auto& f : row.free)
      if (f.value != 0.0) cells[static_cast<std::size_t>(i)].push_back({-1, f.var, 0});
    auto& c = cells[static_cast<std::size_t>(i)];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    all.insert(all.end(), c.begin(), c.end());
  }
  std::sort(all.begin(), all.end());
  auto count = [&](const std::array<int, 3>& c) {
    auto r = std::equal_range(all.begin(), all.end(), c);
    return r.second - r.first;
  };

  RowScreen out;
  std::vector<int> suspects;
  for (int i = 0; i < m; ++i) {
    bool priv = false;
    for (const auto& c : cells[static_cast<std::size_t>(i)])
      if (count(c) == 1) {
        priv = true;
        break;
      }
    if (priv)
      out.keep.push_back(i);
    else
      suspects.push_back(i);
  }
  if (suspects.empty()) return out;

  // Dense representation of the suspect rows over their cells.
  std::vector<std::array<int, 3>> local;
  for (int i : suspects)
    local.insert(local.end(), cells[static_cast<std::size_t>(i)].begin(), cells[static_cast<std::size_t>(i)].end());
  std::sort(local.begin(), local.end());
  local.erase(std::unique(local.begin(), local.end()), local.end());
  const auto ns = static_cast<Eigen::Index>(suspects.size());
  MatrixXd R = MatrixXd::Zero(ns, static_cast<Eigen::Index>(local.size()));
  auto col = [&](const std::array<int, 3>& c) {
    return static_cast<Eigen::Index>(std::lower_bound(local.begin(), local.end(), c) - local.begin());
  };
  VectorXd bs(ns);
  for (Eigen::Index k = 0; k < ns; ++k) {
    const auto& row = P.rows[static_cast<std::size_t>(suspects[static_cast<std::size_t>(k)])];
    for (const auto& e : row.entries) {
      // off-diagonal entries count twice in <A, X>
      const double w = e.p == e.q ? 1.0 : 2.0;
      R(k, col({e.block, e.p, e.q})) += w * e.value;
    }
    for (const auto& f : row.free) R(k, col({-1, f.var, 0})) += f.value;
    bs(k) = row.rhs;
  }
  const MatrixXd gram = R * R.transpose();
  Eigen::LDLT<MatrixXd> ldlt(gram);
  const VectorXd D = ldlt.vectorD();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(ns));
  std::iota(order.begin(), order.end(), 0);
  const auto& tr = ldlt.transpositionsP();
  for (Eigen::Index k = 0; k < ns; ++k) std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(tr.coeff(k))]);
  const double dmax = std::max(D.cwiseAbs().maxCoeff(), 0.0);
  std::vector<Eigen::Index> kept_local;
  std::vector<Eigen::Index> drop_local;
  for (Eigen::Index k = 0; k < ns; ++k) {
    const bool dependent = dmax == 0.0 || std::abs(D(k)) <= rank_tol * dmax;
    (dependent ? drop_local : kept_local).push_back(order[static_cast<std::size_t>(k)]);
  }
  std::sort(kept_local.begin(), kept_local.end());
  for (auto k : kept_local) out.keep.push_back(suspects[static_cast<std::size_t>(k)]);
  std::sort(out.keep.begin(), out.keep.end());

  // Consistency of every dropped row with the kept suspects.
  MatrixXd Rk(static_cast<Eigen::Index>(kept_local.size()), R.cols());
  VectorXd bk(Rk.rows());
  for (Eigen::Index k = 0; k < Rk.rows(); ++k) {
    Rk.row(k) = R.row(kept_local[static_cast<std::size_t>(k)]);
    bk(k) = bs(kept_local[static_cast<std::size_t>(k)]);
  }
  Eigen::LDLT<MatrixXd> kept_fact;
  if (Rk.rows() > 0) kept_fact.compute(Rk * Rk.transpose());
  for (auto k : drop_local) {
    const int orig = suspects[static_cast<std::size_t>(k)];
    out.dropped.push_back(orig);
    VectorXd c = VectorXd::Zero(Rk.rows());
    if (Rk.rows() > 0) c = kept_fact.solve(Rk * R.row(k).transpose());
    const double mismatch = bs(k) - (Rk.rows() > 0 ? c.dot(bk) : 0.0);
    if (std::abs(mismatch) > 1e-9 * (1.0 + std::abs(bs(k)) + inf_norm(bk)) && !out.inconsistent) {
      out.inconsistent = true;
      VectorXd y = VectorXd::Zero(m);
      y(orig) = 1.0;
      for (Eigen::Index j = 0; j < Rk.rows(); ++j) y(suspects[static_cast<std::size_t>(kept_local[static_cast<std::size_t>(j)])]) = -c(j);
      out.certificate = y / mismatch;  // scaled so b^T y = 1
    }
  }
  std::sort(out.dropped.begin(), out.dropped.end());
  return out;
}

class Solver {
 public:
  Solver(const SdpProblem& P, const std::vector<int>& rows, const SolverOptions& opt) : P_(P), opt_(opt) {
    nb_ = P.block_sizes.size();
    nf_ = P.num_free;
    m_ = static_cast<int>(rows.size());
    rows_.reserve(rows.size());
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      rows_.push_back(&P.rows[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])]);
      b_(i) = rows_.back()->rhs;
    }
    C_.resize(nb_);
    for (std::size_t k = 0; k < nb_; ++k) C_[k] = MatrixXd::Zero(P.block_sizes[k], P.block_sizes[k]);
    for (const auto& e : P.objective) {
      C_[static_cast<std::size_t>(e.block)](e.p, e.q) += e.value;
      if (e.p != e.q) C_[static_cast<std::size_t>(e.block)](e.q, e.p) += e.value;
    }
    has_C_ = max_abs(C_) > 0.0;
    cf_ = VectorXd::Zero(nf_);
    for (std::size_t j = 0; j < P.objective_free.size(); ++j) cf_(static_cast<Eigen::Index>(j)) = P.objective_free[j];
    build_structure();
  }

  SdpSolution run();

 private:
  struct BlockRows {
    std::vector<int> row;         // active row index, ascending
    std::vector<int> start;       // entry range [start[k], start[k+1])
    std::vector<SymEntry> entry;  // p <= q
  };
  struct Component {
    std::vector<int> rows;  // ascending active row indices
    std::vector<int> blocks;
    std::vector<int> free_cols;
    Eigen::SparseMatrix<double> B;  // rows x free_cols
    MatrixXd M;  // Schur block; holds its Cholesky factor (lower) after factor()
  };
  struct Scaling {
    MatrixXd G, Ginv, W;
    VectorXd lambda;
  };
  struct Direction {
    Blocks dX, dS;
    VectorXd dy, dxf;
    double dtau = 0.0, dkappa = 0.0;
    Blocks dx_scaled, ds_scaled;  // in the NT frame
  };

  void build_structure();
  VectorXd apply_A(const Blocks& X) const;
  Blocks apply_At(const VectorXd& y) const;
  VectorXd apply_B(const VectorXd& xf) const;
  VectorXd apply_Bt(const VectorXd& y) const;
  double c_inner(const Blocks& X) const { return has_C_ ? inner(C_, X) : 0.0; }
  bool scale(std::vector<Scaling>& sc) const;
  void assemble(const std::vector<Scaling>& sc);
  bool factor(const std::vector<Scaling>& sc);
  void solve_K_factored(const VectorXd& r, const VectorXd& s, VectorXd& u, VectorXd& v) const;
  void solve_K(const VectorXd& r, const VectorXd& s, VectorXd& u, VectorXd& v) const;
  Direction direction(const std::vector<Scaling>& sc, double eta, const Blocks& RX, double r_tk, const VectorXd& q1,
                      const VectorXd& q2, double cWc, const Blocks& WCW) const;
  double max_step(const std::vector<Scaling>& sc, Direction& d) const;

  const SdpProblem& P_;
  const SolverOptions& opt_;
  std::size_t nb_ = 0;
  int nf_ = 0;
  int m_ = 0;
  std::vector<const SdpProblem::Row*> rows_;
  VectorXd b_;
  Blocks C_;
  bool has_C_ = false;
  VectorXd cf_;
  std::vector<BlockRows> block_rows_;
  std::vector<Component> comps_;
  std::vector<int> row_comp_, row_local_;
  Eigen::LLT<MatrixXd> free_llt_;
  double regularization_ = 0.0;
  const std::vector<Scaling>* scaling_ = nullptr;  // scaling behind the current factorization

  // iterate
  Blocks X_, S_;
  VectorXd y_, xf_;
  double tau_ = 1.0, kappa_ = 1.0;
};

void Solver::build_structure() {
  block_rows_.assign(nb_, {});
  DisjointSets sets(std::max(m_, 1));
  std::vector<int> first_row(nb_, -1);
  for (std::size_t k = 0; k < nb_; ++k) block_rows_[k].start.push_back(0);
  for (int i = 0; i < m_; ++i) {
    // group entries of row i per block (stable order)
    std::vector<std::vector<SymEntry>> per(nb_);
    for (const auto& e : rows_[static_cast<std::size_t>(i)]->entries)
      if (e.value != 0.0) per[static_cast<std::size_t>(e.block)].push_back(e);
    for (std::size_t k = 0; k < nb_; ++k) {
      if (per[k].empty()) continue;
      auto& br = block_rows_[k];
      br.row.push_back(i);
      br.entry.insert(br.entry.end(), per[k].begin(), per[k].end());
      br.start.push_back(static_cast<int>(br.entry.size()));
      if (first_row[k] < 0)
        first_row[k] = i;
      else
        sets.unite(first_row[k], i);
    }
  }
  row_comp_.assign(static_cast<std::size_t>(m_), -1);
  row_local_.assign(static_cast<std::size_t>(m_), -1);
  std::vector<int> root_comp(static_cast<std::size_t>(std::max(m_, 1)), -1);
  for (int i = 0; i < m_; ++i) {
    const int r = sets.find(i);
    if (root_comp[static_cast<std::size_t>(r)] < 0) {
      root_comp[static_cast<std::size_t>(r)] = static_cast<int>(comps_.size());
      comps_.emplace_back();
    }
    auto& c = comps_[static_cast<std::size_t>(root_comp[static_cast<std::size_t>(r)])];
    row_comp_[static_cast<std::size_t>(i)] = root_comp[static_cast<std::size_t>(r)];
    row_local_[static_cast<std::size_t>(i)] = static_cast<int>(c.rows.size());
    c.rows.push_back(i);
  }
  for (std::size_t k = 0; k < nb_; ++k)
    if (first_row[k] >= 0) comps_[static_cast<std::size_t>(row_comp_[static_cast<std::size_t>(first_row[k])])].blocks.push_back(static_cast<int>(k));
  for (auto& c : comps_) {
    std::vector<int> cols;
    for (int i : c.rows)
      for (const auto& f : rows_[static_cast<std::size_t>(i)]->free)
        if (f.value != 0.0) cols.push_back(f.var);
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    c.free_cols = cols;
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t l = 0; l < c.rows.size(); ++l)
      for (const auto& f : rows_[static_cast<std::size_t>(c.rows[l])]->free) {
        const auto j = std::lower_bound(cols.begin(), cols.end(), f.var) - cols.begin();
        trip.emplace_back(static_cast<int>(l), static_cast<int>(j), f.value);
      }
    c.B.resize(static_cast<Eigen::Index>(c.rows.size()), static_cast<Eigen::Index>(cols.size()));
    c.B.setFromTriplets(trip.begin(), trip.end());
  }
}

VectorXd Solver::apply_A(const Blocks& X) const {
  VectorXd r(m_);
  for (int i = 0; i < m_; ++i) r(i) = sym_inner(rows_[static_cast<std::size_t>(i)]->entries, X);
  return r;
}

Blocks Solver::apply_At(const VectorXd& y) const {
  Blocks out(nb_);
  for (std::size_t k = 0; k < nb_; ++k) out[k] = MatrixXd::Zero(P_.block_sizes[k], P_.block_sizes[k]);
  for (int i = 0; i < m_; ++i) {
    const double yi = y(i);
    if (yi == 0.0) continue;
    for (const auto& e : rows_[static_cast<std::size_t>(i)]->entries) {
      auto& B = out[static_cast<std::size_t>(e.block)];
      B(e.p, e.q) += yi * e.value;
      if (e.p != e.q) B(e.q, e.p) += yi * e.value;
    }
  }
  return out;
}

VectorXd Solver::apply_B(const VectorXd& xf) const {
  VectorXd r = VectorXd::Zero(m_);
  for (int i = 0; i < m_; ++i)
    for (const auto& f : rows_[static_cast<std::size_t>(i)]->free) r(i) += f.value * xf(f.var);
  return r;
}

VectorXd Solver::apply_Bt(const VectorXd& y) const {
  VectorXd r = VectorXd::Zero(nf_);
  for (int i = 0; i < m_; ++i)
    for (const auto& f : rows_[static_cast<std::size_t>(i)]->free) r(f.var) += f.value * y(i);
  return r;
}

bool Solver::scale(std::vector<Scaling>& sc) const {
  sc.resize(nb_);
  for (std::size_t k = 0; k < nb_; ++k) {
    Eigen::LLT<MatrixXd> lx(X_[k]);
    Eigen::LLT<MatrixXd> ls(S_[k]);
    if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return false;
    const MatrixXd Lx = lx.matrixL();
    const MatrixXd Ls = ls.matrixL();
    Eigen::JacobiSVD<MatrixXd> svd(Ls.transpose() * Lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd lam = svd.singularValues();
    if (lam.minCoeff() <= 0.0) return false;
    const VectorXd isq = lam.cwiseSqrt().cwiseInverse();
    auto& s = sc[k];
    s.lambda = lam;
    s.G = Lx * svd.matrixV() * isq.asDiagonal();
    s.Ginv = isq.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
    s.W = s.G * s.G.transpose();
  }
  return true;
}

// M_ij = <A_i, W A_j W> per component.
void Solver::assemble(const std::vector<Scaling>& sc) {
  for (auto& c : comps_) c.M = MatrixXd::Zero(static_cast<Eigen::Index>(c.rows.size()), static_cast<Eigen::Index>(c.rows.size()));
  for (std::size_t k = 0; k < nb_; ++k) {
    const auto& br = block_rows_[k];
    if (br.row.empty()) continue;
    const MatrixXd& W = sc[k].W;
    const Eigen::Index n = W.rows();
    auto& M = comps_[static_cast<std::size_t>(row_comp_[static_cast<std::size_t>(br.row[0])])].M;
    std::vector<int> ps;
    MatrixXd H(n, n);
    for (std::size_t a = 0; a < br.row.size(); ++a) {
      const int b0 = br.start[a], b1 = br.start[a + 1];
      // H = sum a' w_p w_q^T so that W A_i W = H + H^T
      ps.clear();
      for (int e = b0; e < b1; ++e) ps.push_back(br.entry[static_cast<std::size_t>(e)].p);
      std::sort(ps.begin(), ps.end());
      ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
      MatrixXd Wp(n, static_cast<Eigen::Index>(ps.size()));
      MatrixXd Z = MatrixXd::Zero(n, static_cast<Eigen::Index>(ps.size()));
      for (std::size_t j = 0; j < ps.size(); ++j) Wp.col(static_cast<Eigen::Index>(j)) = W.col(ps[j]);
      for (int e = b0; e < b1; ++e) {
        const auto& en = br.entry[static_cast<std::size_t>(e)];
        const auto j = std::lower_bound(ps.begin(), ps.end(), en.p) - ps.begin();
        Z.col(j) += (en.p == en.q ? 0.5 * en.value : en.value) * W.col(en.q);
      }
      H.noalias() = Wp * Z.transpose();
      const int li = row_local_[static_cast<std::size_t>(br.row[a])];
      for (std::size_t bidx = a; bidx < br.row.size(); ++bidx) {
        double s = 0.0;
        for (int e = br.start[bidx]; e < br.start[bidx + 1]; ++e) {
          const auto& en = br.entry[static_cast<std::size_t>(e)];
          s += en.p == en.q ? 2.0 * en.value * H(en.p, en.p) : 2.0 * en.value * (H(en.p, en.q) + H(en.q, en.p));
        }
        const int lj = row_local_[static_cast<std::size_t>(br.row[bidx])];
        M(std::min(li, lj), std::max(li, lj)) += s;
      }
    }
  }
  for (auto& c : comps_) c.M.triangularView<Eigen::StrictlyLower>() = c.M.transpose();
}

// Factors the Schur blocks in place, then the free-variable complement
// B^T M^-1 B. Failed factorizations are retried with stronger regularization.
bool Solver::factor(const std::vector<Scaling>& sc) {
  double reg = opt_.regularization;
  for (int attempt = 0; attempt < 4; ++attempt, reg *= 100.0) {
    assemble(sc);
    bool ok = true;
    for (auto& c : comps_) {
      for (Eigen::Index i = 0; i < c.M.rows(); ++i) c.M(i, i) += reg * (1.0 + std::abs(c.M(i, i)));
      Eigen::LLT<Eigen::Ref<MatrixXd>> llt(c.M);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (nf_ > 0) {
      // F = B^T M^-1 B, built from column chunks so M^-1 B is never stored whole
      MatrixXd F = MatrixXd::Zero(nf_, nf_);
      constexpr Eigen::Index kChunk = 256;
      for (const auto& c : comps_) {
        const Eigen::Index nc = c.B.cols();
        for (Eigen::Index j0 = 0; j0 < nc; j0 += kChunk) {
          const Eigen::Index w = std::min(kChunk, nc - j0);
          MatrixXd Z = MatrixXd(c.B.middleCols(j0, w));
          c.M.triangularView<Eigen::Lower>().solveInPlace(Z);
          c.M.triangularView<Eigen::Lower>().transpose().solveInPlace(Z);
          const MatrixXd G = c.B.transpose() * Z;
          for (Eigen::Index bb = 0; bb < w; ++bb)
            for (Eigen::Index a = 0; a < nc; ++a)
              F(c.free_cols[static_cast<std::size_t>(a)], c.free_cols[static_cast<std::size_t>(j0 + bb)]) += G(a, bb);
        }
      }
      F = 0.5 * (F + F.transpose()).eval();
      for (Eigen::Index i = 0; i < nf_; ++i) F(i, i) += reg * (1.0 + std::abs(F(i, i)));
      free_llt_.compute(F);
      if (free_llt_.info() != Eigen::Success) continue;
    }
    regularization_ = reg;
    scaling_ = &sc;
    return true;
  }
  return false;
}

// [M B; B^T 0] [u; v] = [r; s] with the (regularized) factors
void Solver::solve_K_factored(const VectorXd& r, const VectorXd& s, VectorXd& u, VectorXd& v) const {
  std::vector<VectorXd> z(comps_.size());
  VectorXd t = VectorXd::Zero(nf_);
  for (std::size_t ci = 0; ci < comps_.size(); ++ci) {
    const auto& c = comps_[ci];
    VectorXd rc(static_cast<Eigen::Index>(c.rows.size()));
    for (std::size_t l = 0; l < c.rows.size(); ++l) rc(static_cast<Eigen::Index>(l)) = r(c.rows[l]);
    // z = M^-1 r_c
    z[ci] = c.M.triangularView<Eigen::Lower>().solve(rc);
    c.M.triangularView<Eigen::Lower>().transpose().solveInPlace(z[ci]);
    if (!c.free_cols.empty()) {
      const VectorXd ty = c.B.transpose() * z[ci];
      for (std::size_t a = 0; a < c.free_cols.size(); ++a) t(c.free_cols[a]) += ty(static_cast<Eigen::Index>(a));
    }
  }
  v = nf_ > 0 ? VectorXd(free_llt_.solve(t - s)) : VectorXd();
  u.resize(m_);
  for (std::size_t ci = 0; ci < comps_.size(); ++ci) {
    const auto& c = comps_[ci];
    // u_c = M^-1 (r_c - B v)
    VectorXd uc = z[ci];
    if (!c.free_cols.empty()) {
      VectorXd vc(static_cast<Eigen::Index>(c.free_cols.size()));
      for (std::size_t a = 0; a < c.free_cols.size(); ++a) vc(static_cast<Eigen::Index>(a)) = v(c.free_cols[a]);
      VectorXd bv = c.B * vc;
      c.M.triangularView<Eigen::Lower>().solveInPlace(bv);
      c.M.triangularView<Eigen::Lower>().transpose().solveInPlace(bv);
      uc -= bv;
    }
    for (std::size_t l = 0; l < c.rows.size(); ++l) u(c.rows[l]) = uc(static_cast<Eigen::Index>(l));
  }
}

// Factored solve plus refinement against the exact operator M u = A(W A^T(u) W);
// the factors lose accuracy as the iterates approach the boundary.
void Solver::solve_K(const VectorXd& r, const VectorXd& s, VectorXd& u, VectorXd& v) const {
  solve_K_factored(r, s, u, v);
  const double scale = 1.0 + std::max(inf_norm(r), inf_norm(s));
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 3; ++it) {
    Blocks T = apply_At(u);
    for (std::size_t k = 0; k < nb_; ++k) T[k] = (*scaling_)[k].W * T[k] * (*scaling_)[k].W;
    VectorXd er = r - apply_A(T);
    if (nf_ > 0) er -= apply_B(v);
    const VectorXd es = nf_ > 0 ? VectorXd(s - apply_Bt(u)) : VectorXd();
    const double res = std::max(inf_norm(er), nf_ > 0 ? inf_norm(es) : 0.0);
    if (res <= 1e-14 * scale || res >= 0.5 * last) break;
    last = res;
    VectorXd du, dv;
    solve_K_factored(er, es, du, dv);
    u += du;
    if (nf_ > 0) v += dv;
  }
}

Solver::Direction Solver::direction(const std::vector<Scaling>& sc, double eta, const Blocks& RX, double r_tk,
                                    const VectorXd& q1, const VectorXd& q2, double cWc, const Blocks& WCW) const {
  // residuals of the current iterate
  const VectorXd r1 = apply_A(X_) + apply_B(xf_) - b_ * tau_;
  Blocks R2 = apply_At(y_);
  for (std::size_t k = 0; k < nb_; ++k) R2[k] += S_[k] - C_[k] * tau_;
  const VectorXd r3 = apply_Bt(y_) - cf_ * tau_;
  const double r4 = b_.dot(y_) - c_inner(X_) - cf_.dot(xf_) - kappa_;

  Blocks T(nb_);
  for (std::size_t k = 0; k < nb_; ++k) T[k] = RX[k] + eta * sc[k].W * R2[k] * sc[k].W;
  const VectorXd h1 = -eta * r1 - apply_A(T);
  const VectorXd h3 = -eta * r3;
  const double h4 = -eta * r4 + c_inner(T) + r_tk / tau_;

  VectorXd p1, p2;
  solve_K(h1, h3, p1, p2);
  const VectorXd a = has_C_ ? apply_A(WCW) : VectorXd::Zero(m_);
  const double num = h4 - (b_ - a).dot(p1) + (nf_ > 0 ? cf_.dot(p2) : 0.0);
  const double den = (b_ - a).dot(q1) - (nf_ > 0 ? cf_.dot(q2) : 0.0) + cWc + kappa_ / tau_;

  Direction d;
  d.dtau = num / den;
  d.dy = p1 + d.dtau * q1;
  d.dxf = nf_ > 0 ? VectorXd(p2 + d.dtau * q2) : VectorXd::Zero(0);
  d.dkappa = (r_tk - kappa_ * d.dtau) / tau_;
  d.dS = apply_At(d.dy);
  d.dX.resize(nb_);
  for (std::size_t k = 0; k < nb_; ++k) {
    d.dS[k] = -eta * R2[k] - d.dS[k] + C_[k] * d.dtau;
    d.dX[k] = RX[k] - sc[k].W * d.dS[k] * sc[k].W;
    d.dX[k] = 0.5 * (d.dX[k] + d.dX[k].transpose());
  }
  return d;
}

double Solver::max_step(const std::vector<Scaling>& sc, Direction& d) const {
  double alpha = std::numeric_limits<double>::infinity();
  d.dx_scaled.resize(nb_);
  d.ds_scaled.resize(nb_);
  for (std::size_t k = 0; k < nb_; ++k) {
    const auto& s = sc[k];
    d.dx_scaled[k] = s.Ginv * d.dX[k] * s.Ginv.transpose();
    d.ds_scaled[k] = s.G.transpose() * d.dS[k] * s.G;
    const VectorXd isq = s.lambda.cwiseSqrt().cwiseInverse();
    for (const MatrixXd* D : {&d.dx_scaled[k], &d.ds_scaled[k]}) {
      MatrixXd E = isq.asDiagonal() * (*D) * isq.asDiagonal();
      E = 0.5 * (E + E.transpose());
      const double emin = Eigen::SelfAdjointEigenSolver<MatrixXd>(E, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
      if (emin < 0.0) alpha = std::min(alpha, -1.0 / emin);
    }
  }
  if (d.dtau < 0.0) alpha = std::min(alpha, -tau_ / d.dtau);
  if (d.dkappa < 0.0) alpha = std::min(alpha, -kappa_ / d.dkappa);
  return alpha;
}

SdpSolution Solver::run() {
  SdpSolution sol;
  X_.resize(nb_);
  S_.resize(nb_);
  for (std::size_t k = 0; k < nb_; ++k) {
    X_[k] = MatrixXd::Identity(P_.block_sizes[k], P_.block_sizes[k]);
    S_[k] = X_[k];
  }
  y_ = VectorXd::Zero(m_);
  xf_ = VectorXd::Zero(nf_);
  tau_ = kappa_ = 1.0;
  double nu = 0.0;
  for (int n : P_.block_sizes) nu += n;

  double cnorm = 1.0 + std::max(max_abs(C_), inf_norm(cf_));
  const double bnorm = 1.0 + inf_norm(b_);
  if (opt_.log) *opt_.log << "iter,mu,pres,dres,gap,tau,kappa,alpha,sigma\n";

  int stalls = 0;
  double last_alpha = 0.0, last_sigma = 0.0;
  // best iterate by the worst tolerance ratio, returned when progress breaks down
  struct Snapshot {
    Blocks X, S;
    VectorXd y, xf;
    double tau = 1.0, kappa = 1.0, score = std::numeric_limits<double>::infinity();
  } best;
  bool restoring = false;
  for (int it = 0;; ++it) {
    // residuals and termination
    const VectorXd r1 = apply_A(X_) + apply_B(xf_) - b_ * tau_;
    Blocks AtyS = apply_At(y_);
    for (std::size_t k = 0; k < nb_; ++k) AtyS[k] += S_[k];
    Blocks R2 = AtyS;
    for (std::size_t k = 0; k < nb_; ++k) R2[k] -= C_[k] * tau_;
    const VectorXd Bty = apply_Bt(y_);
    const VectorXd r3 = Bty - cf_ * tau_;
    const double pobj = (c_inner(X_) + cf_.dot(xf_)) / tau_;
    const double dobj = b_.dot(y_) / tau_;
    const double pres = inf_norm(r1) / tau_ / bnorm;
    const double dres = std::max(max_abs(R2), inf_norm(r3)) / tau_ / cnorm;
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double mu = (inner(X_, S_) + tau_ * kappa_) / (nu + 1.0);
    sol.iterations = it;
    sol.primal_infeasibility = pres;
    sol.dual_infeasibility = dres;
    sol.gap = gap;
    if (opt_.log)
      *opt_.log << it << ',' << mu << ',' << pres << ',' << dres << ',' << gap << ',' << tau_ << ',' << kappa_ << ','
                << last_alpha << ',' << last_sigma << std::endl;

    auto finish = [&](Status st, double scale_by) {
      sol.status = st;
      sol.X.resize(nb_);
      sol.S.resize(nb_);
      for (std::size_t k = 0; k < nb_; ++k) {
        sol.X[k] = X_[k] / scale_by;
        sol.S[k] = S_[k] / scale_by;
      }
      sol.y = y_ / scale_by;
      sol.x_free = xf_ / scale_by;
      sol.primal_objective = pobj;
      sol.dual_objective = dobj;
      return sol;
    };

    if (pres <= opt_.tol_primal && dres <= opt_.tol_dual && gap <= opt_.tol_gap) return finish(Status::optimal, tau_);
    if (restoring) return finish(Status::numerical_failure, std::max(tau_, 1e-300));
    const double score = std::max({pres / opt_.tol_primal, dres / opt_.tol_dual, gap / opt_.tol_gap});
    if (score < best.score) best = {X_, S_, y_, xf_, tau_, kappa_, score};
    // Falls back to the best iterate; the next pass reports its status.
    auto breakdown = [&]() -> bool {
      if (!std::isfinite(best.score)) return false;
      X_ = best.X;
      S_ = best.S;
      y_ = best.y;
      xf_ = best.xf;
      tau_ = best.tau;
      kappa_ = best.kappa;
      restoring = true;
      return true;
    };
    const double by = b_.dot(y_);
    if (by > 0.0 && std::max(max_abs(AtyS), inf_norm(Bty)) / by <= opt_.tol_infeasible) {
      auto s = finish(Status::infeasible_certificate, by);
      s.primal_objective = s.dual_objective = std::numeric_limits<double>::quiet_NaN();
      return s;
    }
    const double cx = -(c_inner(X_) + cf_.dot(xf_));
    if (cx > 0.0 && inf_norm(apply_A(X_) + apply_B(xf_)) / cx <= opt_.tol_infeasible) {
      auto s = finish(Status::unbounded_certificate, cx);
      s.primal_objective = s.dual_objective = std::numeric_limits<double>::quiet_NaN();
      return s;
    }
    if (it >= opt_.max_iterations) return finish(Status::max_iterations, tau_);

    std::vector<Scaling> sc;
    if (!scale(sc) || !factor(sc)) {
      if (breakdown()) continue;
      return finish(Status::numerical_failure, tau_);
    }

    Blocks WCW(nb_);
    double cWc = 0.0;
    for (std::size_t k = 0; k < nb_; ++k) WCW[k] = sc[k].W * C_[k] * sc[k].W;
    if (has_C_) cWc = inner(C_, WCW);
    VectorXd q1, q2;
    {
      const VectorXd a = has_C_ ? apply_A(WCW) : VectorXd::Zero(m_);
      solve_K(a + b_, cf_, q1, q2);
    }

    // predictor
    Blocks RX(nb_);
    for (std::size_t k = 0; k < nb_; ++k) RX[k] = -X_[k];
    Direction aff = direction(sc, 1.0, RX, -tau_ * kappa_, q1, q2, cWc, WCW);
    const double a_aff = std::min(1.0, max_step(sc, aff));
    double mu_aff = tau_ * kappa_ + a_aff * (tau_ * aff.dkappa + kappa_ * aff.dtau) + a_aff * a_aff * aff.dtau * aff.dkappa;
    for (std::size_t k = 0; k < nb_; ++k) {
      const MatrixXd Xn = X_[k] + a_aff * aff.dX[k];
      const MatrixXd Sn = S_[k] + a_aff * aff.dS[k];
      mu_aff += Xn.cwiseProduct(Sn).sum();
    }
    mu_aff /= (nu + 1.0);
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // corrector
    for (std::size_t k = 0; k < nb_; ++k) {
      const auto& s = sc[k];
      const auto n = static_cast<Eigen::Index>(s.lambda.size());
      MatrixXd Zc = -0.5 * (aff.dx_scaled[k] * aff.ds_scaled[k] + aff.ds_scaled[k] * aff.dx_scaled[k]);
      for (Eigen::Index i = 0; i < n; ++i) Zc(i, i) += sigma * mu - s.lambda(i) * s.lambda(i);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) Zc(i, j) *= 2.0 / (s.lambda(i) + s.lambda(j));
      RX[k] = s.G * Zc * s.G.transpose();
      RX[k] = 0.5 * (RX[k] + RX[k].transpose());
    }
    const double r_tk = sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa;
    Direction d = direction(sc, 1.0 - sigma, RX, r_tk, q1, q2, cWc, WCW);
    const double alpha = std::min(1.0, opt_.step_fraction * max_step(sc, d));

    for (std::size_t k = 0; k < nb_; ++k) {
      X_[k] += alpha * d.dX[k];
      S_[k] += alpha * d.dS[k];
      X_[k] = 0.5 * (X_[k] + X_[k].transpose());
      S_[k] = 0.5 * (S_[k] + S_[k].transpose());
    }
    y_ += alpha * d.dy;
    if (nf_ > 0) xf_ += alpha * d.dxf;
    tau_ += alpha * d.dtau;
    kappa_ += alpha * d.dkappa;
    last_alpha = alpha;
    last_sigma = sigma;
    stalls = alpha < 1e-8 ? stalls + 1 : 0;
    if (stalls >= 3 || !std::isfinite(tau_) || tau_ <= 0.0) {
      if (breakdown()) continue;
      return finish(Status::numerical_failure, std::max(tau_, 1e-300));
    }
  }
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolverOptions& options) {
  problem.validate();
  const RowScreen screen = screen_rows(problem, options.rank_tolerance);
  const auto m = static_cast<Eigen::Index>(problem.rows.size());
  if (screen.inconsistent) {
    SdpSolution sol;
    sol.status = Status::infeasible_certificate;
    sol.y = screen.certificate;
    sol.removed_rows = static_cast<int>(screen.dropped.size());
    for (int n : problem.block_sizes) {
      sol.X.push_back(MatrixXd::Zero(n, n));
      sol.S.push_back(MatrixXd::Zero(n, n));
    }
    sol.x_free = VectorXd::Zero(problem.num_free);
    sol.primal_objective = sol.dual_objective = std::numeric_limits<double>::quiet_NaN();
    return sol;
  }
  Solver solver(problem, screen.keep, options);
  SdpSolution sol = solver.run();
  // expand y back to all rows; dropped rows carry zero multipliers
  VectorXd y = VectorXd::Zero(m);
  for (std::size_t k = 0; k < screen.keep.size(); ++k) y(screen.keep[k]) = sol.y(static_cast<Eigen::Index>(k));
  sol.y = y;
  sol.removed_rows = static_cast<int>(screen.dropped.size());
  return sol;
}

}  // namespace reachplan::sdp
