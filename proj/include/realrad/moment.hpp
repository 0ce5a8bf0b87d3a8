// Truncated monomial indices, moment vectors and moment/localizing matrices.
#pragma once

#include "realrad/linalg.hpp"
#include "realrad/polycore.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace realrad {

// All exponents of degree <= t in grevlex-ascending order.
class MonomialIndex {
 public:
  MonomialIndex() = default;
  MonomialIndex(std::size_t n, int t) : n_(n), t_(t) {
    if (n < 1) throw std::invalid_argument("need at least one variable");
    if (t < 0) throw std::invalid_argument("negative order");
    for (int d = 0; d <= t; ++d) {
      std::vector<Exponent> layer;
      Exponent e(n);
      fill(layer, e, 0, d);
      std::sort(layer.begin(), layer.end(), GrevlexLess());
      for (auto& x : layer) {
        pos_.emplace(x, static_cast<int>(mons_.size()));
        mons_.push_back(std::move(x));
      }
    }
    for (int d = 0; d <= t; ++d) {
      int c = 0;
      for (const auto& m : mons_)
        if (m.degree() <= d) ++c;
      prefix_.push_back(c);
    }
  }

  std::size_t nvars() const { return n_; }
  int order() const { return t_; }
  int size() const { return static_cast<int>(mons_.size()); }
  const Exponent& operator[](int i) const { return mons_[static_cast<std::size_t>(i)]; }
  const std::vector<Exponent>& monomials() const { return mons_; }

  // Number of monomials of degree <= d.
  int count_upto(int d) const {
    if (d < 0) return 0;
    if (d > t_) throw std::out_of_range("degree above index order");
    return prefix_[static_cast<std::size_t>(d)];
  }

  bool contains(const Exponent& e) const { return pos_.count(e) != 0; }

  int position(const Exponent& e) const {
    auto it = pos_.find(e);
    if (it == pos_.end()) throw std::out_of_range("exponent outside the monomial index");
    return it->second;
  }

 private:
  static void fill(std::vector<Exponent>& out, Exponent& e, std::size_t i, int rest) {
    if (i + 1 == e.size()) {
      e.set(i, rest);
      out.push_back(e);
      e.set(i, 0);
      return;
    }
    for (int a = rest; a >= 0; --a) {
      e.set(i, a);
      fill(out, e, i + 1, rest - a);
    }
    e.set(i, 0);
  }

  std::size_t n_ = 0;
  int t_ = 0;
  std::vector<Exponent> mons_;
  std::map<Exponent, int, GrevlexLess> pos_;
  std::vector<int> prefix_;
};

inline std::shared_ptr<const MonomialIndex> build_index(std::size_t n, int t) {
  return std::make_shared<const MonomialIndex>(n, t);
}

// y_alpha for all |alpha| <= 2t, stored in index position order.
struct MomentVector {
  std::shared_ptr<const MonomialIndex> index;  // order 2t
  Vector values;

  int order() const { return index->order(); }
  double operator[](const Exponent& e) const { return values(index->position(e)); }
  bool normalized(double eps = 0.0) const { return std::fabs(values(0) - 1.0) <= eps; }
};

template <class C>
Vector vect(const Polynomial<C>& h, const MonomialIndex& index) {
  if (h.degree() > index.order()) throw std::invalid_argument("polynomial degree exceeds the index order");
  Vector v = Vector::Zero(index.size());
  for (const auto& [e, c] : h.terms()) {
    if constexpr (std::is_same_v<C, double>) {
      v(index.position(e)) = c;
    } else {
      v(index.position(e)) = c.get_d();
    }
  }
  return v;
}

// Localizing matrix of f: entry (a,b) = sum_g f_g y_{a+b+g}, a,b of degree <= s.
template <class C>
Matrix assemble_localizer(const Polynomial<C>& f, const MomentVector& y, int s) {
  const int df = std::max(f.degree(), 0);
  if (s < 0 || 2 * s + df > y.order()) throw std::invalid_argument("localizer order exceeds the moment vector");
  const MonomialIndex& big = *y.index;
  const int m = big.count_upto(s);
  Matrix M = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      Exponent ab = big[i] + big[j];
      double acc = 0.0;
      for (const auto& [g, c] : f.terms()) {
        double cv;
        if constexpr (std::is_same_v<C, double>) {
          cv = c;
        } else {
          cv = c.get_d();
        }
        acc += cv * y[ab + g];
      }
      M(i, j) = acc;
      M(j, i) = acc;
    }
  }
  return M;
}

inline Matrix assemble_moment(const MomentVector& y, int s) {
  if (s < 0 || 2 * s > y.order()) throw std::invalid_argument("moment order exceeds the moment vector");
  const MonomialIndex& big = *y.index;
  const int m = big.count_upto(s);
  Matrix M(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) M(i, j) = M(j, i) = y[big[i] + big[j]];
  return M;
}

// Moments of the Dirac measure at a point.
inline MomentVector dirac_moments(const std::vector<double>& point, std::shared_ptr<const MonomialIndex> index) {
  if (point.size() != index->nvars()) throw std::invalid_argument("point dimension mismatch");
  MomentVector y{index, Vector(index->size())};
  for (int k = 0; k < index->size(); ++k) {
    double v = 1.0;
    const Exponent& e = (*index)[k];
    for (std::size_t i = 0; i < point.size(); ++i) v *= std::pow(point[i], e[i]);
    y.values(k) = v;
  }
  return y;
}

}  // namespace realrad
