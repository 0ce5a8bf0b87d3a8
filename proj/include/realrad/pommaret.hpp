// Pommaret division, the class/corank certificate, weak to strong bases,
// involutive normal forms and a Buchberger check for exact bases.
#pragma once

#include "realrad/kernelbasis.hpp"
#include "realrad/polycore.hpp"

#include <string>
#include <vector>

namespace realrad {

// Multiplicative variables {1, ..., cls(e)} as 1-based internal indices.
inline std::vector<int> multiplicative_variables(const Exponent& e) {
  std::vector<int> out;
  for (int i = 1; i <= class_of(e); ++i) out.push_back(i);
  return out;
}

inline bool involutively_divides(const Exponent& d, const Exponent& m) {
  d.check_dim(m);
  if (!d.divides(m)) return false;
  const std::size_t k = static_cast<std::size_t>(class_of(d));
  for (std::size_t j = k; j < d.size(); ++j)
    if (m[j] != d[j]) return false;
  return true;
}

struct ClassProfile {
  std::vector<int> alpha;  // alpha[j-1] = number of class-j elements

  int weighted_sum() const {
    int s = 0;
    for (std::size_t j = 0; j < alpha.size(); ++j) s += static_cast<int>(j + 1) * alpha[j];
    return s;
  }
  int count() const {
    int s = 0;
    for (int a : alpha) s += a;
    return s;
  }
};

template <class C>
ClassProfile class_profile(const std::vector<Polynomial<C>>& elems, std::size_t n, int deg) {
  ClassProfile p;
  p.alpha.assign(n, 0);
  for (const auto& g : elems)
    if (g.degree() == deg) ++p.alpha[static_cast<std::size_t>(class_of_poly(g) - 1)];
  return p;
}

inline ClassProfile class_profile(const ReducedBasis& b, std::size_t n, int deg) {
  return class_profile(b.elements, n, deg);
}

inline bool certificate_check(const ClassProfile& profile, int crk_tm1, int crk_tm2,
                              std::string* diagnostic = nullptr) {
  const int diff = crk_tm1 - crk_tm2;
  if (diff < 0) {
    if (diagnostic) *diagnostic = "numerical-rank inconsistency: corank decreases with the order";
    return false;
  }
  if (diagnostic) diagnostic->clear();
  return profile.weighted_sum() == diff;
}

enum class Strength { Weak, Strong };

template <class C>
struct PommaretBasis {
  std::vector<Polynomial<C>> elements;
  Strength strength = Strength::Weak;

  std::vector<std::vector<int>> multiplicative() const {
    std::vector<std::vector<int>> out;
    for (const auto& h : elements) out.push_back(multiplicative_variables(h.lead_exponent()));
    return out;
  }
};

namespace detail {

template <class C>
bool negligible(const C& c, double cut) {
  if constexpr (std::is_same_v<C, double>) {
    return std::fabs(c) <= cut;
  } else {
    (void)cut;
    return sgn(c) == 0;
  }
}

template <class C>
Polynomial<C> inv_nf(const Polynomial<C>& f, const std::vector<Polynomial<C>>& H, double eps) {
  const double cut = eps * std::max(1.0, f.max_abs_coeff());
  Polynomial<C> p = f;
  Polynomial<C> r(f.nvars());
  while (!p.is_zero()) {
    Exponent e = p.lead_exponent();
    C c = p.lead_coeff();
    if (negligible(c, cut)) {
      p.erase(e);
      continue;
    }
    const Polynomial<C>* div = nullptr;
    for (const auto& h : H)
      if (involutively_divides(h.lead_exponent(), e)) {
        div = &h;
        break;
      }
    if (div) {
      p.add_scaled(C(-c / div->lead_coeff()), e - div->lead_exponent(), *div);
      p.erase(e);
    } else {
      r.add_term(e, c);
      p.erase(e);
    }
  }
  return r;
}

}  // namespace detail

template <class C>
Polynomial<C> involutive_normal_form(const Polynomial<C>& f, const PommaretBasis<C>& H, double eps = 0.0) {
  return detail::inv_nf(f, H.elements, eps);
}

// Keeps the elements whose leading exponent has no involutive divisor among
// the others, then reduces their tails involutively and makes them monic.
template <class C>
PommaretBasis<C> strong_from_weak(const std::vector<Polynomial<C>>& weak, double eps = 0.0) {
  std::vector<Polynomial<C>> v;
  for (const auto& h : weak)
    if (!h.is_zero()) v.push_back(h);
  std::stable_sort(v.begin(), v.end(), [](const Polynomial<C>& a, const Polynomial<C>& b) {
    return grevlex_compare(a.lead_exponent(), b.lead_exponent()) == Cmp::Greater;
  });
  std::vector<Polynomial<C>> kept;
  for (std::size_t i = 0; i < v.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < v.size() && !drop; ++j) {
      if (i == j) continue;
      const Exponent& a = v[j].lead_exponent();
      const Exponent& b = v[i].lead_exponent();
      if (involutively_divides(a, b) && (a != b || j < i)) drop = true;
    }
    if (!drop) kept.push_back(v[i]);
  }
  PommaretBasis<C> out;
  out.strength = Strength::Strong;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto& h = kept[i];
    std::vector<Polynomial<C>> others;
    for (std::size_t j = 0; j < kept.size(); ++j)
      if (j != i) others.push_back(kept[j]);
    Polynomial<C> tail = h;
    tail.erase(h.lead_exponent());
    Polynomial<C> red = detail::inv_nf(tail, others, eps);
    if (!red.is_zero() && grevlex_compare(red.lead_exponent(), h.lead_exponent()) != Cmp::Less)
      throw std::runtime_error("inconsistent weak basis: tail reduction raised the leading term");
    red.add_term(h.lead_exponent(), h.lead_coeff());
    out.elements.push_back(red.monic());
  }
  return out;
}

// Pairwise: no leading exponent involutively divides another.
template <class C>
bool cones_disjoint(const PommaretBasis<C>& H) {
  for (std::size_t i = 0; i < H.elements.size(); ++i)
    for (std::size_t j = 0; j < H.elements.size(); ++j)
      if (i != j && involutively_divides(H.elements[i].lead_exponent(), H.elements[j].lead_exponent())) return false;
  return true;
}

// Ordinary full reduction by a list of exact polynomials.
inline QPoly normal_form(const QPoly& f, const std::vector<QPoly>& G) {
  QPoly p = f;
  QPoly r(f.nvars());
  while (!p.is_zero()) {
    Exponent e = p.lead_exponent();
    mpq_class c = p.lead_coeff();
    const QPoly* div = nullptr;
    for (const auto& g : G)
      if (!g.is_zero() && g.lead_exponent().divides(e)) {
        div = &g;
        break;
      }
    if (div) {
      p.add_scaled(mpq_class(-c / div->lead_coeff()), e - div->lead_exponent(), *div);
      p.erase(e);
    } else {
      r.add_term(e, c);
      p.erase(e);
    }
  }
  return r;
}

inline bool groebner_verify(const std::vector<QPoly>& G) {
  for (std::size_t i = 0; i < G.size(); ++i)
    for (std::size_t j = i + 1; j < G.size(); ++j) {
      const Exponent& a = G[i].lead_exponent();
      const Exponent& b = G[j].lead_exponent();
      Exponent l = lcm(a, b);
      if (l == a + b) continue;
      QPoly s(G[i].nvars());
      s.add_scaled(mpq_class(1 / G[i].lead_coeff()), l - a, G[i]);
      s.add_scaled(mpq_class(-1 / G[j].lead_coeff()), l - b, G[j]);
      if (!normal_form(s, G).is_zero()) return false;
    }
  return true;
}

inline bool groebner_verify(const PommaretBasis<mpq_class>& H) { return groebner_verify(H.elements); }

// Exact arithmetic is required; floating bases are rejected.
inline bool groebner_verify(const PommaretBasis<double>&) {
  throw std::invalid_argument("groebner_verify needs exact coefficients");
}

}  // namespace realrad
