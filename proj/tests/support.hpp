// Shared helpers for the unit tests and the acceptance binary: golden
// inputs, random instances and the structural property checks.
#pragma once

#include "realrad/pipeline.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace realrad::testing {

inline std::string data_path(const std::string& name) { return std::string(REALRAD_DATA) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ParsedSystem load_system(const std::string& name) { return parse_system(read_file(data_path(name))); }

inline QPoly parse_in(const std::string& text, const ParsedSystem& sys) { return parse_polynomial(text, sys.order); }

// Span equality of two exact bases: every element reduces to zero modulo the
// other set. Both sides must be Groebner bases for this to be a proof.
inline bool same_ideal(const std::vector<QPoly>& a, const std::vector<QPoly>& b) {
  for (const auto& f : a)
    if (!normal_form(f, b).is_zero()) return false;
  for (const auto& f : b)
    if (!normal_form(f, a).is_zero()) return false;
  return true;
}

// Same set of polynomials up to order and sign.
inline bool same_up_to_sign(const std::vector<QPoly>& a, const std::vector<QPoly>& b) {
  if (a.size() != b.size()) return false;
  std::vector<char> used(b.size(), 0);
  for (const auto& f : a) {
    bool hit = false;
    for (std::size_t k = 0; k < b.size() && !hit; ++k) {
      if (used[k]) continue;
      QPoly neg = b[k];
      neg *= mpq_class(-1);
      if (f == b[k] || f == neg) {
        used[k] = 1;
        hit = true;
      }
    }
    if (!hit) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Random instances: generators are products of random linear forms through
// random points of {-1,0,1}^n, so the points are known members of the variety.
// Larger coordinates push the degree-2t moments past what a fixed relative
// tau can separate.

struct RandomInstance {
  ProblemSpec spec;
  std::vector<std::vector<double>> points;  // internal variable indexing
};

inline RandomInstance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> nd(1, 3), coord(-1, 1), coef(-3, 3);
  const std::size_t n = static_cast<std::size_t>(nd(rng));
  const int npts = std::uniform_int_distribution<int>(1, n == 1 ? 2 : 3)(rng);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
  RandomInstance inst;
  inst.spec.order = VariableOrder(names);
  std::vector<std::vector<int>> pts;
  while (static_cast<int>(pts.size()) < npts) {
    std::vector<int> p(n);
    for (auto& v : p) v = coord(rng);
    if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
  }
  for (const auto& p : pts) inst.points.emplace_back(p.begin(), p.end());
  const std::size_t ngens = n + static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 1)(rng));
  for (std::size_t g = 0; g < ngens; ++g) {
    QPoly prod = QPoly::constant(n, 1);
    for (const auto& p : pts) {
      QPoly lin(n);
      bool nonzero = false;
      while (!nonzero) {
        lin = QPoly(n);
        for (std::size_t i = 0; i < n; ++i) {
          int a = coef(rng);
          if (a == 0) continue;
          nonzero = true;
          lin.add_term(Exponent::unit(n, i), mpq_class(a));
          lin.add_term(Exponent(n), mpq_class(-a * p[i]));
        }
      }
      prod = prod * lin;
    }
    inst.spec.generators.push_back(prod);
  }
  inst.spec.generators = autoreduce(inst.spec.generators);
  return inst;
}

// ---------------------------------------------------------------------------
// Property checks on one solved order. Each returns an empty string on
// success and a short description otherwise.

inline Vector coeff_vector(const RPoly& p, const MonomialIndex& index, int m) {
  Vector v = Vector::Zero(m);
  for (const auto& [e, c] : p.terms()) {
    int pos = index.position(e);
    if (pos >= m) throw std::out_of_range("polynomial outside the truncation");
    v(pos) = c;
  }
  return v;
}

inline double kernel_residual(const Matrix& M, const Vector& v) {
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return (M * v).cwiseAbs().maxCoeff() / (scale * std::max(1.0, v.cwiseAbs().maxCoeff()));
}

// ker M_{t-1}(y) restricted to degree <= t-2 equals ker M_{t-2}(y).
inline std::string check_truncation(const Matrix& Mt, const MonomialIndex& big, int t, double tau) {
  const int m1 = big.count_upto(t - 1), m2 = big.count_upto(t - 2);
  ReducedBasis b1 = reduced_kernel_basis(Mt.topLeftCorner(m1, m1), big, tau);
  ReducedBasis b2 = reduced_kernel_basis(Mt.topLeftCorner(m2, m2), big, tau);
  ReducedBasis tr = truncate_basis(b1, t - 2);
  if (tr.size() != b2.size()) return "truncated basis size " + std::to_string(tr.size()) + " vs " + std::to_string(b2.size());
  if (tr.leading_monomials() != b2.leading_monomials()) return "truncated leading monomials differ";
  const Matrix M2 = Mt.topLeftCorner(m2, m2);
  for (const auto& g : tr.elements)
    if (kernel_residual(M2, coeff_vector(g, big, m2)) > 10 * tau) return "truncated element not in ker M_{t-2}";
  return {};
}

// g in ker M_s(y) and deg(x_i g) <= s-1 imply x_i g in ker M_s(y), for
// every corner s <= t.
inline std::string check_closure(const Matrix& Mt, const MonomialIndex& big, int t, double tau) {
  const std::size_t n = big.nvars();
  for (int s = 1; s <= t; ++s) {
    const int m = big.count_upto(s);
    const Matrix Ms = Mt.topLeftCorner(m, m);
    const double bound = 10 * tau * std::max(1.0, Ms.norm());
    ReducedBasis b = reduced_kernel_basis(Ms, big, tau);
    for (const auto& g : b.elements) {
      if (g.degree() + 1 > s - 1) continue;
      for (std::size_t i = 0; i < n; ++i) {
        Vector v = coeff_vector(g.shifted(Exponent::unit(n, i)), big, m);
        const double r = (Ms * v).norm() / v.norm();
        if (r > bound)
          return "s=" + std::to_string(s) + " x_i * g left the kernel (residual " + std::to_string(r) + ")";
      }
    }
  }
  return {};
}

// Averaging: ker M_t((y1+y2)/2) = ker M_t(y1) ∩ ker M_t(y2) for moment vectors
// of points; checked by comparing ranks of the stacked matrices.
inline std::string check_averaging(const std::vector<double>& p, const std::vector<double>& q, int t) {
  auto idx = build_index(p.size(), 2 * t);
  MomentVector a = dirac_moments(p, idx), b = dirac_moments(q, idx);
  MomentVector avg{idx, 0.5 * (a.values + b.values)};
  Matrix Ma = assemble_moment(a, t), Mb = assemble_moment(b, t), Mavg = assemble_moment(avg, t);
  const double tau = 1e-10;
  const int ra = numerical_rank(Ma, tau).rank, rb = numerical_rank(Mb, tau).rank;
  Matrix stacked(Ma.rows() * 2, Ma.cols());
  stacked << Ma, Mb;
  Eigen::JacobiSVD<Matrix> svd(stacked);
  const Vector& s = svd.singularValues();
  int rs = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > tau * std::max(1.0, s(0))) ++rs;
  const int ravg = numerical_rank(Mavg, tau).rank;
  if (ravg != rs) return "rank of the average " + std::to_string(ravg) + " vs intersection " + std::to_string(rs);
  if (ravg < std::max(ra, rb)) return "average has smaller rank than a summand";
  NullspaceResult ns = rank_and_nullspace(Mavg, tau);
  for (Eigen::Index k = 0; k < ns.basis.cols(); ++k) {
    if (kernel_residual(Ma, ns.basis.col(k)) > 1e-8) return "kernel of the average not in ker M(y1)";
    if (kernel_residual(Mb, ns.basis.col(k)) > 1e-8) return "kernel of the average not in ker M(y2)";
  }
  return {};
}

inline std::string check_grevlex(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> U(0, 3);
  auto draw = [&] {
    Exponent e(n);
    for (std::size_t i = 0; i < n; ++i) e.set(i, U(rng));
    return e;
  };
  for (int k = 0; k < 200; ++k) {
    Exponent a = draw(), b = draw(), c = draw();
    Cmp ab = grevlex_compare(a, b), ba = grevlex_compare(b, a);
    if ((ab == Cmp::Less) != (ba == Cmp::Greater) || ((ab == Cmp::Equal) != (a == b))) return "antisymmetry";
    if (ab == Cmp::Less && grevlex_compare(b, c) == Cmp::Less && grevlex_compare(a, c) != Cmp::Less)
      return "transitivity";
    if (ab != grevlex_compare(a + c, b + c)) return "multiplicativity";
    if (!a.is_zero() && grevlex_compare(Exponent(n), a) != Cmp::Less) return "well-order at 1";
    if (a.degree() == b.degree() && ab == Cmp::Less && class_of(a) > class_of(b)) return "class respect";
  }
  return {};
}

inline std::string check_strong_basis(const PommaretBasis<double>& H, double eps) {
  if (!cones_disjoint(H)) return "involutive cones overlap";
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  if (H.elements.empty()) return {};
  const std::size_t n = H.elements.front().nvars();
  for (int k = 0; k < 5; ++k) {
    RPoly f(n);
    for (const auto& h : H.elements) f.add_scaled(U(rng), Exponent::unit(n, static_cast<std::size_t>(k) % n), h);
    f.add_term(Exponent(n), U(rng));
    RPoly r1 = involutive_normal_form(f, H, eps);
    RPoly r2 = involutive_normal_form(r1, H, eps);
    if ((r1 - r2).max_abs_coeff() > 1e-9 * std::max(1.0, r1.max_abs_coeff())) return "normal form not idempotent";
  }
  return {};
}

struct PropertyOutcome {
  int instances = 0;
  int certified = 0;
  int orders_checked = 0;
  std::vector<std::string> failures;
};

// Solves each random instance from t = 2d to 2d+2 and runs every check.
inline PropertyOutcome run_property_suite(int count, std::uint64_t seed, double tau = 1e-10) {
  PropertyOutcome out;
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    const std::uint64_t s = seed * 1000 + static_cast<std::uint64_t>(k);
    RandomInstance inst = random_instance(s);
    const std::size_t n = inst.spec.nvars();
    const std::string tag = "instance " + std::to_string(k) + " (n=" + std::to_string(n) + "): ";
    ++out.instances;
    if (auto e = check_grevlex(rng, n); !e.empty()) out.failures.push_back(tag + e);
    for (std::size_t a = 0; a < inst.points.size(); ++a)
      for (std::size_t b = a + 1; b < inst.points.size(); ++b)
        if (auto e = check_averaging(inst.points[a], inst.points[b], 3); !e.empty()) out.failures.push_back(tag + e);

    inst.spec.options.tau = tau;
    const int d = max_half_degree(inst.spec);
    const int t0 = std::max(2, 2 * d);
    bool certified = false;
    for (int t = t0; t <= t0 + 2 && !certified; ++t) {
      RelaxationProblem P = build_relaxation(inst.spec, t);
      SolveResult S = solve_generic(P);
      if (S.status == SolveStatus::Infeasible) {
        out.failures.push_back(tag + "relaxation reported infeasible although the points are feasible");
        break;
      }
      const MonomialIndex& big = *P.index;
      Matrix Mt = assemble_moment(S.y, t);
      ++out.orders_checked;
      if (auto e = check_truncation(Mt, big, t, tau); !e.empty()) out.failures.push_back(tag + "t=" + std::to_string(t) + " " + e);
      if (auto e = check_closure(Mt, big, t, tau); !e.empty()) out.failures.push_back(tag + "t=" + std::to_string(t) + " " + e);
      // points of the variety are feasible, so their kernels contain the generic kernel
      for (const auto& p : inst.points) {
        MomentVector yp = dirac_moments(p, P.index);
        Matrix Mp = assemble_moment(yp, t);
        ReducedBasis b = reduced_kernel_basis(Mt, big, tau);
        for (const auto& g : b.elements)
          if (kernel_residual(Mp, coeff_vector(g, big, big.count_upto(t))) > std::max(1e-5, 1e3 * tau)) {
            out.failures.push_back(tag + "t=" + std::to_string(t) + " generic kernel element does not vanish at a point");
            break;
          }
      }
      const int m1 = big.count_upto(t - 1);
      ReducedBasis b1 = reduced_kernel_basis(Mt.topLeftCorner(m1, m1), big, tau);
      ClassProfile prof = class_profile(b1, n, t - 2);
      auto degs = corank_profile(b1);
      const int diff = degs.count(t - 1) ? degs[t - 1] : 0;
      if (prof.weighted_sum() != diff) continue;
      std::vector<RPoly> weak = truncate_basis(b1, t - 2).elements;
      if (weak.empty()) continue;
      if (!kernel_structure_holds(weak, Mt.topLeftCorner(m1, m1), big, t, std::max(1e-6, 100 * tau)))
        out.failures.push_back(tag + "t=" + std::to_string(t) + " kernel spanning structure violated");
      PommaretBasis<double> strong;
      try {
        strong = strong_from_weak(weak, 1e-2 * tau);
      } catch (const std::exception& ex) {
        out.failures.push_back(tag + "t=" + std::to_string(t) + " " + ex.what());
        continue;
      }
      if (auto e = check_strong_basis(strong, 1e-2 * tau); !e.empty()) out.failures.push_back(tag + e);
      bool generators_reduce = true;
      for (const auto& h : inst.spec.generators) {
        RPoly hd = to_double(h);
        if (involutive_normal_form(hd, strong, 1e-2 * tau).max_abs_coeff() > 1e-3 * hd.max_abs_coeff()) generators_reduce = false;
      }
      if (generators_reduce) certified = true;
    }
    if (certified) ++out.certified;
  }
  return out;
}

}  // namespace realrad::testing
