// The order sweep: relaxation, generic point, kernel bases, certificate,
// basis extraction and rationalization.
#pragma once

#include "realrad/kernelbasis.hpp"
#include "realrad/linalg.hpp"
#include "realrad/moment.hpp"
#include "realrad/polycore.hpp"
#include "realrad/pommaret.hpp"
#include "realrad/sdpsolve.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace realrad {

using RationalMatrix = std::vector<std::vector<mpq_class>>;

struct RunOptions {
  double tau = 1e-8;
  std::optional<int> t_start;
  std::optional<int> t_max;
  std::optional<double> ball;  // radius of the bounding ball, off when empty
  std::uint64_t seed = 0;
  double rational_tol = 1e-6;
  KernelMethod method = KernelMethod::Staircase;
  bool auto_retry = false;
  SolveOptions solver;
};

struct ProblemSpec {
  VariableOrder order;
  std::vector<QPoly> generators;
  std::vector<QPoly> inequalities;
  RunOptions options;
  std::optional<RationalMatrix> coordinate_change;  // x~ = A x, user variable order

  std::size_t nvars() const { return order.size(); }
};

inline ProblemSpec make_spec(const ParsedSystem& sys, RunOptions opts = {}) {
  return ProblemSpec{sys.order, sys.generators, sys.inequalities, opts, std::nullopt};
}

inline int half_degree(int deg) { return (deg + 1) / 2; }

inline int max_half_degree(const ProblemSpec& spec) {
  int d = 0;
  for (const auto& h : spec.generators) d = std::max(d, half_degree(h.degree()));
  return d;
}

// ---------------------------------------------------------------------------
// Relaxation

namespace detail {

struct RowKey {
  std::vector<std::pair<int, mpq_class>> entries;
  bool operator<(const RowKey& o) const {
    const std::size_t n = std::min(entries.size(), o.entries.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (entries[i].first != o.entries[i].first) return entries[i].first < o.entries[i].first;
      int c = cmp(entries[i].second, o.entries[i].second);
      if (c != 0) return c < 0;
    }
    return entries.size() < o.entries.size();
  }
};

inline std::string product_label(const std::vector<int>& nu) {
  std::string s;
  for (std::size_t i = 0; i < nu.size(); ++i)
    if (nu[i]) s += (s.empty() ? "f" : "*f") + std::to_string(i + 1);
  return s;
}

}  // namespace detail

inline RelaxationProblem build_relaxation(const ProblemSpec& spec, int t) {
  const std::size_t n = spec.nvars();
  const int d = max_half_degree(spec);
  if (t < d) throw std::invalid_argument("relaxation order below d");
  if (spec.inequalities.size() > 6) throw std::invalid_argument("at most 6 inequalities are supported");
  RelaxationProblem P;
  P.n = n;
  P.t = t;
  P.index = build_index(n, 2 * t);
  const MonomialIndex& big = *P.index;

  // Equalities sum_g h_g y_{g+delta} = 0 for |delta| <= 2t - 2 d_j, deduplicated.
  std::set<detail::RowKey> seen;
  std::vector<detail::RowKey> rows;
  for (const auto& h : spec.generators) {
    const int dj = half_degree(h.degree());
    const int top = big.count_upto(2 * t - 2 * dj);
    for (int k = 0; k < top; ++k) {
      std::map<int, mpq_class> acc;
      for (const auto& [g, c] : h.terms()) acc[big.position(g + big[k])] += c;
      detail::RowKey key;
      for (auto& [pos, c] : acc)
        if (sgn(c) != 0) key.entries.emplace_back(pos, c);
      if (key.entries.empty()) continue;
      mpq_class lead = key.entries.front().second;
      for (auto& e : key.entries) e.second /= lead;
      if (seen.insert(key).second) rows.push_back(std::move(key));
    }
  }
  P.eq_rows = Matrix::Zero(static_cast<Eigen::Index>(rows.size()) + 1, big.size());
  P.eq_rhs = Vector::Zero(static_cast<Eigen::Index>(rows.size()) + 1);
  P.eq_rows(0, 0) = 1.0;
  P.eq_rhs(0) = 1.0;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [pos, c] : rows[r].entries) P.eq_rows(static_cast<Eigen::Index>(r) + 1, pos) = c.get_d();

  P.blocks.push_back(localizing_block("moment", RPoly::constant(n, 1.0), t, big));
  const std::size_t s = spec.inequalities.size();
  for (std::uint32_t mask = 1; mask < (1u << s); ++mask) {
    std::vector<int> nu(s, 0);
    QPoly f = QPoly::constant(n, 1);
    for (std::size_t i = 0; i < s; ++i)
      if (mask & (1u << i)) {
        nu[i] = 1;
        f = f * spec.inequalities[i];
      }
    const int order = t - half_degree(f.degree());
    if (order < 0) continue;
    P.blocks.push_back(localizing_block(detail::product_label(nu), to_double(f), order, big));
  }
  if (spec.options.ball) {
    const double R = *spec.options.ball;
    RPoly f = RPoly::constant(n, R * R);
    for (std::size_t i = 0; i < n; ++i) {
      Exponent e(n);
      e.set(i, 2);
      f.add_term(e, -1.0);
    }
    if (t >= 1) P.blocks.push_back(localizing_block("ball", f, t - 1, big));
  }
  return P;
}

// ---------------------------------------------------------------------------
// Coordinate changes

inline RationalMatrix invert(const RationalMatrix& A) {
  const std::size_t n = A.size();
  for (const auto& row : A)
    if (row.size() != n) throw std::invalid_argument("coordinate change must be square");
  RationalMatrix M = A;
  RationalMatrix I(n, std::vector<mpq_class>(n, 0));
  for (std::size_t i = 0; i < n; ++i) I[i][i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && sgn(M[p][c]) == 0) ++p;
    if (p == n) throw std::invalid_argument("coordinate change is singular");
    std::swap(M[p], M[c]);
    std::swap(I[p], I[c]);
    mpq_class piv = M[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      M[c][j] /= piv;
      I[c][j] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || sgn(M[r][c]) == 0) continue;
      mpq_class f = M[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        M[r][j] -= f * M[c][j];
        I[r][j] -= f * I[c][j];
      }
    }
  }
  return I;
}

// Linear interreduction: Gauss-Jordan on coefficient vectors with columns in
// grevlex-descending order; rows are made monic.
inline std::vector<QPoly> autoreduce(const std::vector<QPoly>& F) {
  std::vector<QPoly> rows;
  for (const auto& f : F)
    if (!f.is_zero()) rows.push_back(f);
  std::vector<QPoly> done;
  while (!rows.empty()) {
    auto it = std::max_element(rows.begin(), rows.end(), [](const QPoly& a, const QPoly& b) {
      return grevlex_compare(a.lead_exponent(), b.lead_exponent()) == Cmp::Less;
    });
    QPoly p = it->monic();
    rows.erase(it);
    const Exponent lead = p.lead_exponent();
    std::vector<QPoly> next;
    for (auto& r : rows) {
      mpq_class c = r.coeff(lead);
      if (sgn(c) != 0) r.add_scaled(mpq_class(-c), Exponent(r.nvars()), p);
      if (!r.is_zero()) next.push_back(std::move(r));
    }
    rows = std::move(next);
    for (auto& q : done) {
      mpq_class c = q.coeff(lead);
      if (sgn(c) != 0) q.add_scaled(mpq_class(-c), Exponent(q.nvars()), p);
    }
    done.push_back(std::move(p));
  }
  return done;
}

// Rewrites the system in the variables x~ = A x (A indexed by the user's
// variable listing), keeping names and order. Generators are autoreduced.
inline ProblemSpec apply_coordinate_change(const ProblemSpec& spec, const RationalMatrix& A) {
  const std::size_t n = spec.nvars();
  if (A.size() != n) throw std::invalid_argument("coordinate change has the wrong size");
  RationalMatrix Ainv = invert(A);
  // x_j = sum_k Ainv[j][k] x~_k, as polynomials in internal indexing
  std::vector<QPoly> image(n);
  for (std::size_t j = 0; j < n; ++j) {
    QPoly lin(n);
    for (std::size_t k = 0; k < n; ++k)
      if (sgn(Ainv[j][k]) != 0) lin.add_term(Exponent::unit(n, spec.order.internal(k)), Ainv[j][k]);
    image[spec.order.internal(j)] = lin;
  }
  auto substitute = [&](const QPoly& p) {
    QPoly out(n);
    for (const auto& [e, c] : p.terms()) {
      QPoly term = QPoly::constant(n, c);
      for (std::size_t i = 0; i < n; ++i)
        if (e[i]) term = term * image[i].pow(e[i]);
      out += term;
    }
    return out;
  };
  ProblemSpec out = spec;
  out.generators.clear();
  for (const auto& h : spec.generators) out.generators.push_back(substitute(h));
  out.generators = autoreduce(out.generators);
  out.inequalities.clear();
  for (const auto& f : spec.inequalities) out.inequalities.push_back(substitute(f));
  out.coordinate_change = A;
  return out;
}

inline RationalMatrix random_coordinate_change(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> U(-2, 2);
  for (;;) {
    RationalMatrix A(n, std::vector<mpq_class>(n));
    for (auto& row : A)
      for (auto& a : row) a = U(rng);
    try {
      invert(A);
      return A;
    } catch (const std::invalid_argument&) {
    }
  }
}

// ---------------------------------------------------------------------------
// Rationalization

// The rational with the smallest denominator in [lo, hi].
inline mpq_class simplest_between(mpq_class lo, mpq_class hi) {
  if (lo > hi) std::swap(lo, hi);
  if (sgn(lo) <= 0 && sgn(hi) >= 0) return 0;
  if (sgn(hi) < 0) return -simplest_between(-hi, -lo);
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), lo.get_num_mpz_t(), lo.get_den_mpz_t());
  if (lo == mpq_class(fl)) return mpq_class(fl);
  if (mpq_class(fl + 1) <= hi) return mpq_class(fl + 1);
  mpq_class a = hi - fl;
  mpq_class b = lo - fl;
  mpq_class inner = simplest_between(1 / a, 1 / b);
  mpq_class r = mpq_class(fl) + 1 / inner;
  r.canonicalize();
  return r;
}

inline mpq_class rationalize(double x, double tol) {
  mpq_class v(x);
  mpq_class e(tol);
  return simplest_between(v - e, v + e);
}

struct RationalizedBasis {
  std::vector<QPoly> basis;
  bool ok = false;  // all generators reduce to zero and the set is a Groebner basis
};

namespace detail {

inline RationalizedBasis rationalize_at(const std::vector<RPoly>& b, const std::vector<QPoly>& generators, double tol) {
  RationalizedBasis out;
  for (const auto& g : b) {
    QPoly q(g.nvars());
    for (const auto& [e, c] : g.terms()) q.add_term(e, rationalize(c, tol));
    if (q.is_zero()) return out;
    out.basis.push_back(q);
  }
  if (out.basis.empty()) return out;
  PommaretBasis<mpq_class> H;
  H.elements = out.basis;
  H.strength = Strength::Strong;
  for (const auto& h : generators)
    if (!involutive_normal_form(h, H).is_zero()) return out;
  out.ok = groebner_verify(H);
  return out;
}

}  // namespace detail

// Tries tol, 10 tol, ... up to `widest`; a candidate is kept only when it
// passes the exact checks, so widening cannot accept a wrong basis.
inline RationalizedBasis rationalize_basis(const std::vector<RPoly>& b, const std::vector<QPoly>& generators,
                                           double tol, double widest = 0.0) {
  RationalizedBasis out = detail::rationalize_at(b, generators, tol);
  for (double w = 10 * tol; !out.ok && w <= widest * (1 + 1e-9); w *= 10) out = detail::rationalize_at(b, generators, w);
  return out;
}

// ---------------------------------------------------------------------------
// The sweep

struct SolverDiagnostics {
  std::string status;
  double eq_residual = 0.0;
  double min_eig = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  double shift = 0.0;

  friend bool operator==(const SolverDiagnostics&, const SolverDiagnostics&) = default;
};

struct OrderRecord {
  int t = 0;
  std::array<int, 3> rank{};    // M_t, M_{t-1}, M_{t-2}
  std::array<int, 3> corank{};
  std::vector<int> alpha;
  int weighted_sum = 0;
  int corank_diff = 0;  // degree-(t-1) elements of the ker M_{t-1} basis
  bool pass = false;
  bool vacuous = false;               // passed, but the generators are not in the extracted ideal
  bool truncation_consistent = true;  // ker M_{t-1} basis truncated = ker M_{t-2} basis
  SolverDiagnostics solver;

  friend bool operator==(const OrderRecord&, const OrderRecord&) = default;
};

enum class RunStatus { Certified, ExhaustedT, Infeasible };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Certified: return "CERTIFIED";
    case RunStatus::ExhaustedT: return "EXHAUSTED_T";
    case RunStatus::Infeasible: return "INFEASIBLE";
  }
  return "?";
}

struct CertificateReport {
  RunStatus status = RunStatus::ExhaustedT;
  std::optional<int> certified_t;
  std::vector<OrderRecord> records;
  VariableOrder order;
  double tau = 0.0;
  std::vector<QPoly> system;  // generators actually solved (after any coordinate change)
  std::vector<RPoly> weak_basis;
  std::vector<RPoly> strong_basis;
  std::vector<QPoly> rationalized;  // empty unless rationalization succeeded
  std::optional<RationalMatrix> coordinate_change;
  std::optional<MomentVector> y;  // generic point of the certified order, not serialized

  const OrderRecord* certified_record() const {
    if (!certified_t) return nullptr;
    for (const auto& r : records)
      if (r.t == *certified_t) return &r;
    return nullptr;
  }
};

inline bool operator==(const CertificateReport& a, const CertificateReport& b) {
  return a.status == b.status && a.certified_t == b.certified_t && a.records == b.records && a.order == b.order &&
         a.tau == b.tau && a.system == b.system && a.weak_basis == b.weak_basis && a.strong_basis == b.strong_basis &&
         a.rationalized == b.rationalized && a.coordinate_change == b.coordinate_change;
}

// Shape of ker M_{t-1} when the certificate holds: the products of
// degree-(t-2) elements with their multiplicative variables together with
// the weak basis have distinct leading monomials and span ker M_{t-1}.
inline bool kernel_structure_holds(const std::vector<RPoly>& weak, const Matrix& M_tm1, const MonomialIndex& index,
                                   int t, double tol) {
  const std::size_t n = index.nvars();
  std::vector<RPoly> S = weak;
  for (const auto& g : weak) {
    if (g.degree() != t - 2) continue;
    for (int i = 1; i <= class_of_poly(g); ++i) S.push_back(g.shifted(Exponent::unit(n, static_cast<std::size_t>(i - 1))));
  }
  std::set<Exponent, GrevlexGreater> leads;
  for (const auto& p : S)
    if (!leads.insert(p.lead_exponent()).second) return false;
  const double scale = std::max(1.0, M_tm1.cwiseAbs().maxCoeff());
  Matrix V(M_tm1.rows(), static_cast<Eigen::Index>(S.size()));
  for (std::size_t k = 0; k < S.size(); ++k) {
    Vector v = Vector::Zero(M_tm1.rows());
    for (const auto& [e, c] : S[k].terms()) {
      int pos = index.position(e);
      if (pos >= M_tm1.rows()) return false;
      v(pos) = c;
    }
    if ((M_tm1 * v).cwiseAbs().maxCoeff() > tol * scale * std::max(1.0, v.cwiseAbs().maxCoeff())) return false;
    V.col(static_cast<Eigen::Index>(k)) = v;
  }
  const int corank = numerical_rank(M_tm1, std::min(0.5, std::max(tol, 1e-15))).corank;
  return static_cast<int>(S.size()) == corank;
}

using RecordCallback = std::function<void(const OrderRecord&)>;

namespace detail {

inline CertificateReport run_once(const ProblemSpec& spec, const RecordCallback& on_record) {
  const RunOptions& opt = spec.options;
  const std::size_t n = spec.nvars();
  if (spec.generators.empty()) throw std::invalid_argument("no generators");
  for (const auto& h : spec.generators)
    if (h.is_zero()) throw std::invalid_argument("zero generator");
  const int d = max_half_degree(spec);
  const int t0 = std::max(2, opt.t_start.value_or(2 * d));
  const int tmax = std::max(t0, opt.t_max.value_or(2 * d + 8));

  CertificateReport rep;
  rep.order = spec.order;
  rep.tau = opt.tau;
  rep.system = spec.generators;
  rep.coordinate_change = spec.coordinate_change;

  for (int t = t0; t <= tmax; ++t) {
    RelaxationProblem P = build_relaxation(spec, t);
    SolveOptions so = opt.solver;
    so.seed = opt.seed;
    SolveResult S = solve_generic(P, so);
    OrderRecord rec;
    rec.t = t;
    rec.solver.status = to_string(S.status);
    rec.solver.eq_residual = S.eq_residual;
    rec.solver.min_eig = S.block_min_eig.empty() ? 0.0 : *std::min_element(S.block_min_eig.begin(), S.block_min_eig.end());
    rec.solver.iterations = S.iterations;
    rec.solver.seed = S.seed;
    rec.solver.shift = S.shift;
    if (S.status == SolveStatus::Infeasible) {
      rep.records.push_back(rec);
      if (on_record) on_record(rec);
      rep.status = RunStatus::Infeasible;
      return rep;
    }
    const MonomialIndex& big = *P.index;
    Matrix M = assemble_moment(S.y, t);
    for (int l = 0; l < 3; ++l) {
      const int m = big.count_upto(t - l);
      RankDecision rd = numerical_rank(M.topLeftCorner(m, m), opt.tau);
      rec.rank[static_cast<std::size_t>(l)] = rd.rank;
      rec.corank[static_cast<std::size_t>(l)] = rd.corank;
    }
    const int m1 = big.count_upto(t - 1);
    const int m2 = big.count_upto(t - 2);
    Matrix M1 = M.topLeftCorner(m1, m1);
    ReducedBasis b1 = reduced_kernel_basis(M1, big, opt.tau, opt.method);
    ReducedBasis b2 = reduced_kernel_basis(M.topLeftCorner(m2, m2), big, opt.tau, opt.method);
    ReducedBasis trunc = truncate_basis(b1, t - 2);
    ClassProfile prof = class_profile(b1, n, t - 2);
    rec.alpha = prof.alpha;
    rec.weighted_sum = prof.weighted_sum();
    auto profile = corank_profile(b1);
    rec.corank_diff = profile.count(t - 1) ? profile[t - 1] : 0;
    rec.truncation_consistent = trunc.leading_monomials() == b2.leading_monomials();
    rec.pass = certificate_check(prof, static_cast<int>(b1.size()), static_cast<int>(b1.size()) - rec.corank_diff);

    if (rec.pass) {
      std::vector<RPoly> weak = trunc.elements;
      PommaretBasis<double> strong = strong_from_weak(weak, 1e-2 * opt.tau);
      bool vacuous = weak.empty();
      for (const auto& h : spec.generators) {
        if (vacuous) break;
        RPoly hd = to_double(h);
        RPoly r = involutive_normal_form(hd, strong, 1e-2 * opt.tau);
        if (r.max_abs_coeff() > 1e-3 * hd.max_abs_coeff()) vacuous = true;
      }
      rec.vacuous = vacuous;
      if (!vacuous) {
        rep.records.push_back(rec);
        if (on_record) on_record(rec);
        rep.status = RunStatus::Certified;
        rep.certified_t = t;
        rep.weak_basis = weak;
        rep.strong_basis = strong.elements;
        RationalizedBasis rb =
            rationalize_basis(strong.elements, spec.generators, opt.rational_tol, 10 * opt.tau);
        if (rb.ok) rep.rationalized = rb.basis;
        rep.y = S.y;
        return rep;
      }
    }
    rep.records.push_back(rec);
    if (on_record) on_record(rec);
  }
  rep.status = RunStatus::ExhaustedT;
  return rep;
}

}  // namespace detail

inline CertificateReport run(const ProblemSpec& spec, const RecordCallback& on_record = {}) {
  CertificateReport rep = detail::run_once(spec, on_record);
  if (rep.status != RunStatus::ExhaustedT || !spec.options.auto_retry) return rep;
  for (int attempt = 1; attempt <= 3; ++attempt) {
    RationalMatrix A = random_coordinate_change(spec.nvars(), spec.options.seed + static_cast<std::uint64_t>(attempt));
    ProblemSpec moved = apply_coordinate_change(spec, A);
    CertificateReport r = detail::run_once(moved, on_record);
    if (r.status != RunStatus::ExhaustedT) return r;
    rep = std::move(r);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Text tables

inline std::string format_record(const OrderRecord& r) {
  std::string s = "t=" + std::to_string(r.t) + ":";
  for (int v : r.rank) s += " " + std::to_string(v);
  s += " /";
  for (int v : r.corank) s += " " + std::to_string(v);
  s += " / α:";
  for (int a : r.alpha) s += " " + std::to_string(a);
  s += " → " + std::to_string(r.weighted_sum);
  s += r.pass ? " = " : " ≠ ";
  s += std::to_string(r.corank_diff);
  if (r.pass && r.vacuous) {
    s += "  (vacuous)";
  } else if (r.pass) {
    s += "  pass";
  } else {
    s += "  fail";
  }
  if (!r.truncation_consistent) s += "  [truncation mismatch]";
  return s;
}

inline std::string format_report(const CertificateReport& rep) {
  std::string s;
  s += "status: " + std::string(to_string(rep.status));
  if (rep.certified_t) s += " at t=" + std::to_string(*rep.certified_t);
  s += "\n";
  s += "ranks (l=0 1 2) / coranks (l=0 1 2) / class profile → Σ j·α_j vs corank difference\n";
  for (const auto& r : rep.records) s += format_record(r) + "\n";
  if (rep.status == RunStatus::Certified) {
    s += "strong basis:\n";
    if (!rep.rationalized.empty()) {
      for (const auto& p : rep.rationalized) s += "  " + to_string(p, rep.order) + "\n";
    } else {
      s += "  (rationalization failed, floating coefficients)\n";
      for (const auto& p : rep.strong_basis) s += "  " + to_string(p, rep.order) + "\n";
    }
  } else if (rep.status == RunStatus::ExhaustedT) {
    s += "no certificate up to the maximal order; a linear coordinate change may help (--coord-change or --auto-retry)\n";
  }
  return s;
}

}  // namespace realrad
