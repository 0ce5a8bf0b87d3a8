// Reduced bases of numerical kernels of truncated moment matrices.
#pragma once

#include "realrad/linalg.hpp"
#include "realrad/moment.hpp"
#include "realrad/polycore.hpp"

#include <map>
#include <set>
#include <vector>

namespace realrad {

enum class KernelMethod {
  Rref,       // row-reduce the SVD nullspace, columns grevlex-descending
  Staircase,  // ordered Cholesky pivots in grevlex-ascending order
};

struct ReducedBasis {
  int order = 0;
  double tau = 0.0;
  std::vector<RPoly> elements;  // grevlex-descending leading monomials, unit leading coefficient
  int corank = 0;               // corank of the matrix it was computed from

  std::set<Exponent, GrevlexGreater> leading_monomials() const {
    std::set<Exponent, GrevlexGreater> s;
    for (const auto& g : elements) s.insert(g.lead_exponent());
    return s;
  }
  std::size_t size() const { return elements.size(); }
};

namespace detail {

inline RPoly row_to_poly(const Vector& row, const MonomialIndex& index, int m) {
  RPoly p(index.nvars());
  for (int k = 0; k < m; ++k)
    if (row(k) != 0.0) p.add_term(index[k], row(k));
  return p;
}

inline void sort_desc(std::vector<RPoly>& v) {
  std::sort(v.begin(), v.end(), [](const RPoly& a, const RPoly& b) {
    return grevlex_compare(a.lead_exponent(), b.lead_exponent()) == Cmp::Greater;
  });
}

}  // namespace detail

// M is M_s(y) with rows/columns in the first M.rows() positions of `index`.
inline ReducedBasis reduced_kernel_basis(const Matrix& M, const MonomialIndex& index, double tau,
                                         KernelMethod method = KernelMethod::Staircase) {
  const int m = static_cast<int>(M.rows());
  if (m > index.size()) throw std::invalid_argument("matrix larger than the monomial index");
  ReducedBasis out;
  out.tau = tau;
  out.order = index[m - 1].degree();
  NullspaceResult ns = rank_and_nullspace(M, tau);
  out.corank = ns.decision.corank;
  if (method == KernelMethod::Rref) {
    if (ns.decision.corank == 0) return out;
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) order[static_cast<std::size_t>(k)] = m - 1 - k;
    RowReduction rr = reduce_rows(ns.basis.transpose(), order, 1e-2 * tau);
    for (Eigen::Index q = 0; q < rr.rows.rows(); ++q)
      out.elements.push_back(detail::row_to_poly(rr.rows.row(q).transpose(), index, m));
  } else {
    OrderedDependence dep = ordered_dependence(M, ns.decision.threshold());
    std::vector<char> is_piv(static_cast<std::size_t>(m), 0);
    for (int p : dep.pivots) is_piv[static_cast<std::size_t>(p)] = 1;
    for (int k = 0; k < m; ++k) {
      if (is_piv[static_cast<std::size_t>(k)]) continue;
      Vector row = Vector::Zero(m);
      row(k) = 1.0;
      for (std::size_t j = 0; j < dep.pivots.size() && dep.pivots[j] < k; ++j)
        row(dep.pivots[j]) = -dep.coeffs(k, static_cast<Eigen::Index>(j));
      double rmax = row.cwiseAbs().maxCoeff();
      for (int q = 0; q < m; ++q)
        if (std::fabs(row(q)) <= 1e-2 * tau * rmax) row(q) = 0.0;
      row(k) = 1.0;
      out.elements.push_back(detail::row_to_poly(row, index, m));
    }
  }
  detail::sort_desc(out.elements);
  return out;
}

inline ReducedBasis truncate_basis(const ReducedBasis& b, int s) {
  ReducedBasis out;
  out.order = std::min(s, b.order);
  out.tau = b.tau;
  for (const auto& g : b.elements)
    if (g.degree() <= s) out.elements.push_back(g);
  out.corank = static_cast<int>(out.elements.size());
  return out;
}

inline std::map<int, int> corank_profile(const ReducedBasis& b) {
  std::map<int, int> prof;
  for (const auto& g : b.elements) ++prof[g.degree()];
  return prof;
}

// Same leading monomials and coefficients within tol.
inline bool same_basis(const ReducedBasis& a, const ReducedBasis& b, double tol) {
  if (a.elements.size() != b.elements.size()) return false;
  for (std::size_t i = 0; i < a.elements.size(); ++i) {
    const RPoly& p = a.elements[i];
    const RPoly& q = b.elements[i];
    if (p.lead_exponent() != q.lead_exponent()) return false;
    RPoly d = p - q;
    if (d.max_abs_coeff() > tol * std::max(1.0, std::max(p.max_abs_coeff(), q.max_abs_coeff()))) return false;
  }
  return true;
}

}  // namespace realrad
