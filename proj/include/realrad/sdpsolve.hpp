// Generic (maximum-rank) points of moment relaxations.
//
// The equality constraints are eliminated once, y = y_p + Z z. Every PSD
// block is then an affine matrix function A_b(z). The solver follows the
// minimizers of
//
//   psi_mu(z, d) = d / mu + c * tr(M_t(y) + d I) - sum_b log det(A_b(z) + d I)
//
// for mu -> 0 with damped Newton steps. The shift d keeps all iterates
// strictly feasible even though the spectrahedron has no interior, so the
// limit point lies in its relative interior; a shift that does not go to
// zero means the relaxation is infeasible. The trace term keeps unbounded
// spectrahedra bounded.
#pragma once

#include "realrad/linalg.hpp"
#include "realrad/moment.hpp"
#include "realrad/polycore.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace realrad {

struct BlockEntry {
  int i;
  int j;
  double c;
};

// Symbolic PSD block: entry (i,j) is a linear form in the moment vector.
struct PsdBlock {
  std::string label;
  int order = 0;
  int size = 0;
  std::vector<std::vector<BlockEntry>> by_moment;  // upper-triangle entries per moment position

  Matrix evaluate(const Vector& y) const {
    Matrix A = Matrix::Zero(size, size);
    for (std::size_t k = 0; k < by_moment.size(); ++k) {
      double v = y(static_cast<Eigen::Index>(k));
      if (v == 0.0) continue;
      for (const auto& e : by_moment[k]) A(e.i, e.j) += e.c * v;
    }
    return A.selfadjointView<Eigen::Upper>();
  }
};

// Localizing block of f at order s over the moment index of order 2t.
inline PsdBlock localizing_block(const std::string& label, const RPoly& f, int s,
                                 const MonomialIndex& big) {
  PsdBlock b;
  b.label = label;
  b.order = s;
  b.size = big.count_upto(s);
  b.by_moment.resize(static_cast<std::size_t>(big.size()));
  for (int i = 0; i < b.size; ++i)
    for (int j = i; j < b.size; ++j) {
      Exponent ab = big[i] + big[j];
      for (const auto& [g, c] : f.terms())
        b.by_moment[static_cast<std::size_t>(big.position(ab + g))].push_back({i, j, c});
    }
  return b;
}

struct RelaxationProblem {
  std::size_t n = 0;
  int t = 0;
  std::shared_ptr<const MonomialIndex> index;  // order 2t
  std::vector<PsdBlock> blocks;                // blocks[0] is M_t(y)
  Matrix eq_rows;                              // includes the row y_0 = 1
  Vector eq_rhs;
};

enum class SolveStatus { GenericPoint, Infeasible, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::GenericPoint: return "GENERIC_POINT";
    case SolveStatus::Infeasible: return "INFEASIBLE";
    case SolveStatus::NumericalFailure: return "NUMERICAL_FAILURE";
  }
  return "?";
}

struct SolveOptions {
  int max_iter = 3000;
  double feas_tol = 1e-8;
  std::uint64_t seed = 0;
  double trace_weight = 1.0;
  double mu_final = 1e-13;
  double mu_factor = 0.1;
  // Weight of a seeded random linear term added to the objective; zero
  // gives the canonical center.
  double perturbation = 0.0;
};

struct SolveResult {
  MomentVector y;
  SolveStatus status = SolveStatus::NumericalFailure;
  double eq_residual = 0.0;
  std::vector<double> block_min_eig;
  int iterations = 0;
  std::uint64_t seed = 0;
  double shift = 0.0;
  int free_dim = 0;
};

namespace detail {

// Symmetric vectorization with sqrt(2) on off-diagonals, so that
// svec(X).dot(svec(Y)) = <X, Y>.
inline void svec_into(const Matrix& X, double* out) {
  const Eigen::Index m = X.rows();
  const double r2 = std::sqrt(2.0);
  std::size_t k = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    out[k++] = X(j, j);
    for (Eigen::Index i = j + 1; i < m; ++i) out[k++] = r2 * X(i, j);
  }
}

struct BlockData {
  Matrix A0;     // block at y_p
  Matrix Bcat;   // [B_1 ... B_p], each m x m
  Vector trace;  // tr(B_k)
  int m = 0;
};

class Barrier {
 public:
  Barrier(const RelaxationProblem& P, const SolveOptions& opt) : P_(P), opt_(opt) {
    aff_ = solve_affine(P.eq_rows, P.eq_rhs);
    p_ = static_cast<int>(aff_.nullspace.cols());
    for (const auto& blk : P.blocks) {
      BlockData d;
      d.m = blk.size;
      d.A0 = blk.evaluate(aff_.particular);
      d.Bcat.resize(d.m, static_cast<Eigen::Index>(d.m) * p_);
      d.trace.resize(p_);
      for (int k = 0; k < p_; ++k) {
        Matrix Bk = blk.evaluate(aff_.nullspace.col(k));
        d.Bcat.block(0, static_cast<Eigen::Index>(k) * d.m, d.m, d.m) = Bk;
        d.trace(k) = Bk.trace();
      }
      data_.push_back(std::move(d));
    }
    lin_ = opt.trace_weight * data_[0].trace;
    if (opt.perturbation > 0.0) {
      std::mt19937_64 rng(opt.seed);
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      Vector r(aff_.nullspace.rows());
      for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = U(rng);
      r *= opt.perturbation * opt.trace_weight / static_cast<double>(r.size());
      lin_ += aff_.nullspace.transpose() * r;
    }
  }

  int dim() const { return p_; }

  Matrix block_at(std::size_t b, const Vector& z, double shift) const {
    const BlockData& d = data_[b];
    Matrix A = d.A0;
    for (int k = 0; k < p_; ++k)
      if (z(k) != 0.0) A += z(k) * d.Bcat.block(0, static_cast<Eigen::Index>(k) * d.m, d.m, d.m);
    A.diagonal().array() += shift;
    return A;
  }

  Vector y_of(const Vector& z) const { return aff_.particular + aff_.nullspace * z; }

  double min_eig_at_start() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& d : data_) lo = std::min(lo, sym_eigen(d.A0).values(0));
    return lo;
  }

  // Objective; +inf outside the domain.
  double value(const Vector& z, double shift, double mu) const {
    double v = shift / mu + lin_.dot(z) + opt_.trace_weight * data_[0].m * shift;
    for (std::size_t b = 0; b < data_.size(); ++b) {
      Eigen::LLT<Matrix> llt(block_at(b, z, shift));
      if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
      double ld = 0.0;
      for (Eigen::Index i = 0; i < data_[b].m; ++i) {
        double dii = llt.matrixLLT()(i, i);
        if (!(dii > 0.0)) return std::numeric_limits<double>::infinity();
        ld += std::log(dii);
      }
      v -= 2.0 * ld;
    }
    return v;
  }

  // Gradient and Hessian in u = (z, shift).
  bool derivatives(const Vector& z, double shift, double mu, Vector& g, Matrix& H) const {
    const int q = p_ + 1;
    g.setZero(q);
    H.setZero(q, q);
    g.head(p_) = lin_;
    g(p_) = 1.0 / mu + opt_.trace_weight * data_[0].m;
    for (std::size_t b = 0; b < data_.size(); ++b) {
      const BlockData& d = data_[b];
      const Eigen::Index m = d.m;
      Eigen::LLT<Matrix> llt(block_at(b, z, shift));
      if (llt.info() != Eigen::Success) return false;
      Matrix Linv = llt.matrixL().solve(Matrix::Identity(m, m));
      // T_k = Linv * B_k for all k at once
      Matrix T = Linv * d.Bcat;
      // C_k = T_k * Linv^T, stacked vertically for one product
      Matrix Tv(m * p_, m);
      for (int k = 0; k < p_; ++k) Tv.block(k * m, 0, m, m) = T.block(0, k * m, m, m);
      Matrix Cv = Tv * Linv.transpose();
      const Eigen::Index sv = m * (m + 1) / 2;
      Matrix S(sv, q);
      for (int k = 0; k < p_; ++k) {
        Matrix Ck = Cv.block(k * m, 0, m, m);
        g(k) -= Ck.trace();
        svec_into(Ck, S.col(k).data());
      }
      Matrix W = Linv.transpose() * Linv;
      Matrix Cd = Linv * Linv.transpose();
      g(p_) -= W.trace();
      svec_into(Cd, S.col(p_).data());
      H.selfadjointView<Eigen::Lower>().rankUpdate(S.transpose());
    }
    H = H.selfadjointView<Eigen::Lower>();
    return true;
  }

  const RelaxationProblem& problem() const { return P_; }
  const AffineSolution& affine() const { return aff_; }

 private:
  const RelaxationProblem& P_;
  SolveOptions opt_;
  AffineSolution aff_;
  int p_ = 0;
  std::vector<BlockData> data_;
  Vector lin_;
};

}  // namespace detail

inline SolveResult solve_generic(const RelaxationProblem& P, const SolveOptions& opt = {}) {
  if (P.blocks.empty() || !P.index) throw std::invalid_argument("relaxation without moment block");
  detail::Barrier B(P, opt);
  const int p = B.dim();
  SolveResult res;
  res.seed = opt.seed;
  res.free_dim = p;

  Vector z = Vector::Zero(p);
  double shift = std::max(0.0, -B.min_eig_at_start()) + 1.0;
  double mu = 1.0;
  int its = 0;
  bool budget_hit = false;
  Vector g;
  Matrix H;
  for (;;) {
    for (int k = 0; k < 100; ++k) {
      if (its >= opt.max_iter) {
        budget_hit = true;
        break;
      }
      if (!B.derivatives(z, shift, mu, g, H)) break;
      ++its;
      Eigen::LDLT<Matrix> ldlt(H);
      Vector dv = -ldlt.solve(g);
      if (!dv.allFinite()) break;
      double dec = -g.dot(dv);
      if (!(dec > 1e-9)) break;
      double f0 = B.value(z, shift, mu);
      // damped step of a self-concordant barrier: stays inside the Dikin ellipsoid
      double s = dec > 0.25 ? 1.0 / (1.0 + std::sqrt(dec)) : 1.0;
      bool moved = false;
      while (s >= 1e-12) {
        double f1 = B.value(z + s * dv.head(p), shift + s * dv(p), mu);
        if (f1 <= f0 - 0.25 * s * dec) {
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) break;
      z += s * dv.head(p);
      shift += s * dv(p);
    }
    if (budget_hit || mu <= opt.mu_final) break;
    mu *= opt.mu_factor;
  }
  res.iterations = its;
  res.shift = shift;
  res.y = MomentVector{P.index, B.y_of(z)};

  res.eq_residual = P.eq_rows.rows() ? (P.eq_rows * res.y.values - P.eq_rhs).cwiseAbs().maxCoeff() : 0.0;
  bool psd_ok = true;
  for (const auto& blk : P.blocks) {
    Matrix A = blk.evaluate(res.y.values);
    double lo = sym_eigen(A).values(0);
    res.block_min_eig.push_back(lo);
    double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if (lo < -opt.feas_tol * scale) psd_ok = false;
  }
  if (shift > std::sqrt(opt.feas_tol)) {
    res.status = SolveStatus::Infeasible;
  } else if (budget_hit || res.eq_residual > opt.feas_tol || !psd_ok) {
    res.status = SolveStatus::NumericalFailure;
  } else {
    res.status = SolveStatus::GenericPoint;
  }
  return res;
}

// Re-solves with random linear perturbations of the objective; each such
// point is again in the relative interior, so its rank must not exceed the
// rank at y and the kernel of y must lie inside its kernel.
inline bool certify_genericity(const RelaxationProblem& P, const MomentVector& y, int trials, double tau,
                               const SolveOptions& base = {}) {
  Matrix My = assemble_moment(y, P.t);
  NullspaceResult ny = rank_and_nullspace(My, tau);
  for (int k = 0; k < trials; ++k) {
    SolveOptions o = base;
    o.seed = base.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k + 1);
    o.perturbation = 0.5;
    SolveResult r = solve_generic(P, o);
    if (r.status != SolveStatus::GenericPoint) return false;
    Matrix Mz = assemble_moment(r.y, P.t);
    NullspaceResult nz = rank_and_nullspace(Mz, tau);
    if (nz.decision.rank > ny.decision.rank) return false;
    if (ny.decision.corank > 0) {
      double scale = std::max(1.0, nz.decision.singular_values.front());
      double res = (Mz * ny.basis).cwiseAbs().maxCoeff();
      if (res > std::sqrt(tau) * scale) return false;
    }
  }
  return true;
}

}  // namespace realrad
