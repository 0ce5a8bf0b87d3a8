// Dense symmetric linear algebra on top of Eigen: eigendecomposition,
// numerical rank with a relative threshold, nullspaces and row reduction.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace realrad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

inline void require_finite(const Matrix& M) {
  if (!M.allFinite()) throw std::invalid_argument("matrix has non-finite entries");
}

inline SymEigen sym_eigen(const Matrix& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("sym_eigen needs a square matrix");
  require_finite(M);
  if (M.rows() == 0) return {Vector(0), Matrix(0, 0)};
  Matrix S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

struct RankDecision {
  std::vector<double> singular_values;  // descending
  double tau = 0.0;
  int rank = 0;
  int corank = 0;

  double threshold() const {
    double s1 = singular_values.empty() ? 0.0 : singular_values.front();
    return tau * std::max(1.0, s1);
  }
};

struct NullspaceResult {
  RankDecision decision;
  Matrix basis;  // orthonormal columns spanning the numerical nullspace
};

// For a symmetric matrix the singular values are the absolute eigenvalues,
// and the singular subspaces are eigenspaces.
inline NullspaceResult rank_and_nullspace(const Matrix& M, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tolerance must lie in (0, 1)");
  const Eigen::Index m = M.rows();
  SymEigen es = sym_eigen(M);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::fabs(es.values(a)) > std::fabs(es.values(b));
  });
  NullspaceResult out;
  out.decision.tau = tau;
  for (auto i : idx) out.decision.singular_values.push_back(std::fabs(es.values(i)));
  const double thr = out.decision.threshold();
  int r = 0;
  for (double s : out.decision.singular_values)
    if (s > thr) ++r;
  out.decision.rank = r;
  out.decision.corank = static_cast<int>(m) - r;
  out.basis.resize(m, out.decision.corank);
  for (int k = 0; k < out.decision.corank; ++k) out.basis.col(k) = es.vectors.col(idx[static_cast<std::size_t>(r + k)]);
  return out;
}

inline RankDecision numerical_rank(const Matrix& M, double tau) {
  return rank_and_nullspace(M, tau).decision;
}

struct RowReduction {
  Matrix rows;              // one reduced row per pivot
  std::vector<int> pivots;  // pivot column of each row
};

// Gauss-Jordan elimination visiting columns in `column_order`. A column is
// skipped when its best remaining entry is at most drop * max|rows|; after
// elimination entries below drop * (row max) are zeroed.
inline RowReduction reduce_rows(const Matrix& rows, const std::vector<int>& column_order, double drop = 1e-12) {
  const Eigen::Index nc = rows.cols();
  if (static_cast<Eigen::Index>(column_order.size()) != nc)
    throw std::invalid_argument("column order must be a permutation of the columns");
  {
    std::vector<int> seen(column_order);
    std::sort(seen.begin(), seen.end());
    for (Eigen::Index i = 0; i < nc; ++i)
      if (seen[static_cast<std::size_t>(i)] != i) throw std::invalid_argument("column order must be a permutation of the columns");
  }
  Matrix R = rows;
  const double scale = R.size() ? R.cwiseAbs().maxCoeff() : 0.0;
  RowReduction out;
  Eigen::Index ri = 0;
  for (int col : column_order) {
    if (ri >= R.rows()) break;
    Eigen::Index k;
    double best = R.col(col).tail(R.rows() - ri).cwiseAbs().maxCoeff(&k);
    k += ri;
    if (best <= drop * scale || best == 0.0) continue;
    R.row(ri).swap(R.row(k));
    R.row(ri) /= R(ri, col);
    for (Eigen::Index q = 0; q < R.rows(); ++q) {
      if (q != ri && R(q, col) != 0.0) R.row(q) -= R(q, col) * R.row(ri);
    }
    R(ri, col) = 1.0;
    for (Eigen::Index q = 0; q < R.rows(); ++q)
      if (q != ri) R(q, col) = 0.0;
    out.pivots.push_back(col);
    ++ri;
  }
  out.rows = R.topRows(ri);
  for (Eigen::Index q = 0; q < ri; ++q) {
    double rmax = out.rows.row(q).cwiseAbs().maxCoeff();
    for (Eigen::Index c = 0; c < nc; ++c)
      if (std::fabs(out.rows(q, c)) <= drop * rmax) out.rows(q, c) = 0.0;
    out.rows(q, out.pivots[static_cast<std::size_t>(q)]) = 1.0;
  }
  return out;
}

// Greedy symmetric pivoting in the natural column order of a PSD matrix,
// applied to its truncation M_r (eigenvalues <= threshold dropped). Column
// k is a pivot when it does not depend on the earlier pivots of M_r; each
// non-pivot column gets its coefficients on the earlier pivots. Working on
// the factor F = U sqrt(Lambda) of M_r instead of a Cholesky recurrence on M
// keeps the pivot count equal to the rank.
struct OrderedDependence {
  std::vector<int> pivots;
  Matrix coeffs;  // m x |pivots|; row k expresses column k through the pivots
};

inline OrderedDependence ordered_dependence(const Matrix& M, double threshold) {
  const Eigen::Index m = M.rows();
  SymEigen es = sym_eigen(M);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m; ++i)
    if (es.values(i) > threshold) keep.push_back(i);
  const Eigen::Index r = static_cast<Eigen::Index>(keep.size());
  Matrix F(m, r);
  for (Eigen::Index j = 0; j < r; ++j) F.col(j) = es.vectors.col(keep[static_cast<std::size_t>(j)]) * std::sqrt(es.values(keep[static_cast<std::size_t>(j)]));

  OrderedDependence out;
  Matrix Q(r, r);
  Eigen::Index np = 0;
  const double floor2 = 1e-4 * threshold;
  for (Eigen::Index k = 0; k < m && np < r; ++k) {
    Vector v = F.row(k).transpose();
    for (int pass = 0; pass < 2; ++pass) v -= Q.leftCols(np) * (Q.leftCols(np).transpose() * v);
    if (v.squaredNorm() > floor2) {
      Q.col(np++) = v.normalized();
      out.pivots.push_back(static_cast<int>(k));
    }
  }
  // in the basis Q the pivot rows form an upper-triangular R
  Matrix P(r, np);
  for (Eigen::Index j = 0; j < np; ++j) P.col(j) = F.row(out.pivots[static_cast<std::size_t>(j)]).transpose();
  const Matrix R = Q.leftCols(np).transpose() * P;
  out.coeffs = Matrix::Zero(m, np);
  Eigen::Index e = 0;  // pivots before k
  for (Eigen::Index k = 0; k < m; ++k) {
    if (e < np && out.pivots[static_cast<std::size_t>(e)] == k) {
      out.coeffs(k, e++) = 1.0;
      continue;
    }
    if (e == 0) continue;
    Vector t = Q.leftCols(e).transpose() * F.row(k).transpose();
    out.coeffs.row(k).head(e) = R.topLeftCorner(e, e).triangularView<Eigen::Upper>().solve(t).transpose();
  }
  return out;
}

inline std::vector<int> ordered_pivots(const Matrix& M, double threshold) {
  return ordered_dependence(M, threshold).pivots;
}

// Orthonormal basis of {x : E x = 0} from a column-pivoted QR of E^T.
// Returns also a particular least-squares solution of E x = e.
struct AffineSolution {
  Vector particular;
  Matrix nullspace;
  int rank = 0;
};

inline AffineSolution solve_affine(const Matrix& E, const Vector& e, double rel = 1e-12) {
  const Eigen::Index N = E.cols();
  if (E.rows() == 0) return {Vector::Zero(N), Matrix::Identity(N, N), 0};
  Eigen::ColPivHouseholderQR<Matrix> qr(E.transpose());
  qr.setThreshold(rel);
  const Eigen::Index r = qr.rank();
  Matrix Q = qr.householderQ() * Matrix::Identity(N, N);
  AffineSolution out;
  out.rank = static_cast<int>(r);
  out.nullspace = Q.rightCols(N - r);
  // E = P R^T Q1^T with Q1 = Q.leftCols(r); x = Q1 w with (R^T) w = P^T e.
  Matrix R = qr.matrixR().topLeftCorner(r, r).template triangularView<Eigen::Upper>();
  Vector pe = qr.colsPermutation().transpose() * e;
  Vector w = R.transpose().template triangularView<Eigen::Lower>().solve(pe.head(r));
  out.particular = Q.leftCols(r) * w;
  return out;
}

}  // namespace realrad
