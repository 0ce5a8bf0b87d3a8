// Sparse multivariate polynomials, the grevlex order and Pommaret classes.
#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace realrad {

// Exponent vector in internal variable order: entry 0 belongs to the
// grevlex-smallest variable.
class Exponent {
 public:
  Exponent() = default;
  explicit Exponent(std::size_t n) : e_(n, 0) {}
  Exponent(std::initializer_list<int> v) : e_(v) { init(); }
  explicit Exponent(std::vector<int> v) : e_(std::move(v)) { init(); }

  static Exponent unit(std::size_t n, std::size_t i) {
    Exponent e(n);
    e.set(i, 1);
    return e;
  }

  std::size_t size() const { return e_.size(); }
  int degree() const { return deg_; }
  bool is_zero() const { return deg_ == 0; }
  int operator[](std::size_t i) const { return e_[i]; }
  const std::vector<int>& entries() const { return e_; }

  void set(std::size_t i, int v) {
    if (v < 0) throw std::invalid_argument("negative exponent entry");
    deg_ += v - e_[i];
    e_[i] = v;
  }

  bool divides(const Exponent& m) const {
    check_dim(m);
    for (std::size_t i = 0; i < e_.size(); ++i)
      if (e_[i] > m.e_[i]) return false;
    return true;
  }

  friend Exponent operator+(const Exponent& a, const Exponent& b) {
    a.check_dim(b);
    Exponent r = a;
    for (std::size_t i = 0; i < r.e_.size(); ++i) r.e_[i] += b.e_[i];
    r.deg_ = a.deg_ + b.deg_;
    return r;
  }

  friend Exponent operator-(const Exponent& a, const Exponent& b) {
    if (!b.divides(a)) throw std::invalid_argument("exponent difference is negative");
    Exponent r = a;
    for (std::size_t i = 0; i < r.e_.size(); ++i) r.e_[i] -= b.e_[i];
    r.deg_ = a.deg_ - b.deg_;
    return r;
  }

  friend Exponent lcm(const Exponent& a, const Exponent& b) {
    a.check_dim(b);
    Exponent r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r.set(i, std::max(a.e_[i], b.e_[i]));
    return r;
  }

  friend bool operator==(const Exponent& a, const Exponent& b) { return a.e_ == b.e_; }
  friend bool operator!=(const Exponent& a, const Exponent& b) { return !(a == b); }

  void check_dim(const Exponent& o) const {
    if (o.e_.size() != e_.size()) throw std::invalid_argument("exponent dimension mismatch");
  }

 private:
  void init() {
    deg_ = 0;
    for (int v : e_) {
      if (v < 0) throw std::invalid_argument("negative exponent entry");
      deg_ += v;
    }
  }

  std::vector<int> e_;
  int deg_ = 0;
};

enum class Cmp { Less, Equal, Greater };

inline Cmp grevlex_compare(const Exponent& a, const Exponent& b) {
  a.check_dim(b);
  if (a.degree() != b.degree()) return a.degree() < b.degree() ? Cmp::Less : Cmp::Greater;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i] ? Cmp::Less : Cmp::Greater;
  }
  return Cmp::Equal;
}

struct GrevlexLess {
  bool operator()(const Exponent& a, const Exponent& b) const {
    return grevlex_compare(a, b) == Cmp::Less;
  }
};

struct GrevlexGreater {
  bool operator()(const Exponent& a, const Exponent& b) const {
    return grevlex_compare(a, b) == Cmp::Greater;
  }
};

// Smallest 1-based index with a nonzero entry; the zero exponent gets n.
inline int class_of(const Exponent& e) {
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] != 0) return static_cast<int>(i) + 1;
  return static_cast<int>(e.size());
}

template <class C>
struct CoeffTraits;

template <>
struct CoeffTraits<double> {
  static bool is_zero(double c) { return c == 0.0; }
  static double abs(double c) { return std::fabs(c); }
  static std::string str(double c) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, c);
    return std::string(buf, res.ptr);
  }
};

template <>
struct CoeffTraits<mpq_class> {
  static bool is_zero(const mpq_class& c) { return sgn(c) == 0; }
  static double abs(const mpq_class& c) { return std::fabs(c.get_d()); }
  static std::string str(const mpq_class& c) { return c.get_str(); }
};

template <class C>
class Polynomial {
 public:
  using Terms = std::map<Exponent, C, GrevlexGreater>;

  Polynomial() = default;
  explicit Polynomial(std::size_t n) : n_(n) {}

  static Polynomial constant(std::size_t n, const C& c) {
    return monomial(Exponent(n), c);
  }

  static Polynomial monomial(const Exponent& e, const C& c) {
    Polynomial p(e.size());
    p.add_term(e, c);
    return p;
  }

  static Polynomial variable(std::size_t n, std::size_t i) {
    return monomial(Exponent::unit(n, i), C(1));
  }

  std::size_t nvars() const { return n_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const Terms& terms() const { return terms_; }

  C coeff(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? C(0) : it->second;
  }

  void add_term(const Exponent& e, const C& c) {
    if (e.size() != n_) throw std::invalid_argument("polynomial dimension mismatch");
    C v = c;
    if constexpr (std::is_same_v<C, mpq_class>) v.canonicalize();  // GMP arithmetic assumes canonical operands
    if (CoeffTraits<C>::is_zero(v)) return;
    auto [it, inserted] = terms_.try_emplace(e, v);
    if (!inserted) {
      it->second += v;
      if (CoeffTraits<C>::is_zero(it->second)) terms_.erase(it);
    }
  }

  void erase(const Exponent& e) { terms_.erase(e); }

  const Exponent& lead_exponent() const {
    if (terms_.empty()) throw std::invalid_argument("zero polynomial has no leading term");
    return terms_.begin()->first;
  }

  const C& lead_coeff() const {
    if (terms_.empty()) throw std::invalid_argument("zero polynomial has no leading term");
    return terms_.begin()->second;
  }

  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, e.degree());
    return d;
  }

  // x^m * p
  Polynomial shifted(const Exponent& m) const {
    Polynomial r(n_);
    for (const auto& [e, c] : terms_) r.terms_.emplace_hint(r.terms_.end(), e + m, c);
    return r;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    check(o);
    for (const auto& [e, c] : o.terms_) add_term(e, C(-c));
    return *this;
  }

  Polynomial& operator*=(const C& s) {
    if (CoeffTraits<C>::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  // this += s * x^m * o, the workhorse of all reductions
  void add_scaled(const C& s, const Exponent& m, const Polynomial& o) {
    check(o);
    for (const auto& [e, c] : o.terms_) add_term(e + m, C(s * c));
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const C& s) { return a *= s; }
  friend Polynomial operator*(const C& s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= C(-1); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check(b);
    Polynomial r(a.n_);
    for (const auto& [eb, cb] : b.terms_) r.add_scaled(cb, eb, a);
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.n_ == b.n_ && a.terms_ == b.terms_;
  }

  Polynomial pow(int k) const {
    if (k < 0) throw std::invalid_argument("negative power");
    Polynomial r = constant(n_, C(1));
    for (int i = 0; i < k; ++i) r = r * *this;
    return r;
  }

  // Make the leading coefficient one.
  Polynomial monic() const {
    Polynomial r = *this;
    if (!r.is_zero()) r *= C(C(1) / lead_coeff());
    return r;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, CoeffTraits<C>::abs(c));
    return m;
  }

 private:
  void check(const Polynomial& o) const {
    if (o.n_ != n_) throw std::invalid_argument("polynomial dimension mismatch");
  }

  std::size_t n_ = 0;
  Terms terms_;
};

using QPoly = Polynomial<mpq_class>;
using RPoly = Polynomial<double>;

template <class C>
int class_of_poly(const Polynomial<C>& p) {
  if (p.is_zero()) throw std::invalid_argument("class of the zero polynomial");
  return class_of(p.lead_exponent());
}

// Nearest double (get_d truncates), so printed doubles parse back exactly.
inline double nearest_double(const mpq_class& q) {
  double d = q.get_d();
  if (!std::isfinite(d)) return d;
  double best = d;
  mpq_class err = abs(q - mpq_class(d));
  for (double c : {std::nextafter(d, -HUGE_VAL), std::nextafter(d, HUGE_VAL)}) {
    if (!std::isfinite(c)) continue;
    mpq_class e = abs(q - mpq_class(c));
    if (e < err) {
      err = e;
      best = c;
    }
  }
  return best;
}

inline RPoly to_double(const QPoly& p) {
  RPoly r(p.nvars());
  for (const auto& [e, c] : p.terms()) r.add_term(e, nearest_double(c));
  return r;
}

// Drops coefficients with |c| <= eps * max|c|.
inline RPoly chop(const RPoly& p, double eps) {
  double cut = eps * p.max_abs_coeff();
  RPoly r(p.nvars());
  for (const auto& [e, c] : p.terms())
    if (std::fabs(c) > cut) r.add_term(e, c);
  return r;
}

// Maps user variable names to internal indices (0 = smallest variable).
class VariableOrder {
 public:
  VariableOrder() = default;

  // Without an explicit order the listed variables are taken smallest first.
  explicit VariableOrder(std::vector<std::string> names) : names_(std::move(names)) {
    to_internal_.resize(names_.size());
    for (std::size_t k = 0; k < names_.size(); ++k) to_internal_[k] = k;
    finish();
  }

  VariableOrder(std::vector<std::string> names, const std::vector<std::string>& largest_first)
      : names_(std::move(names)) {
    if (largest_first.size() != names_.size())
      throw std::invalid_argument("order must list every variable exactly once");
    const std::size_t n = names_.size();
    to_internal_.assign(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      auto it = std::find(names_.begin(), names_.end(), largest_first[r]);
      if (it == names_.end()) throw std::invalid_argument("unknown variable in order: " + largest_first[r]);
      std::size_t k = static_cast<std::size_t>(it - names_.begin());
      if (to_internal_[k] != n) throw std::invalid_argument("variable repeated in order: " + largest_first[r]);
      to_internal_[k] = n - 1 - r;
    }
    finish();
  }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t internal(std::size_t user) const { return to_internal_[user]; }
  std::size_t user(std::size_t internal) const { return to_user_[internal]; }

  std::size_t internal(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw std::invalid_argument("unknown variable: " + name);
    return internal(static_cast<std::size_t>(it - names_.begin()));
  }

  const std::string& name_of_internal(std::size_t i) const { return names_[to_user_[i]]; }

  // Names listed from the largest variable down, the `order:` line format.
  std::vector<std::string> largest_first() const {
    std::vector<std::string> out;
    for (std::size_t i = names_.size(); i-- > 0;) out.push_back(name_of_internal(i));
    return out;
  }

  friend bool operator==(const VariableOrder& a, const VariableOrder& b) {
    return a.names_ == b.names_ && a.to_internal_ == b.to_internal_;
  }

 private:
  void finish() {
    to_user_.assign(names_.size(), 0);
    for (std::size_t k = 0; k < names_.size(); ++k) to_user_[to_internal_[k]] = k;
  }

  std::vector<std::string> names_;
  std::vector<std::size_t> to_internal_;
  std::vector<std::size_t> to_user_;
};

// Monomial as a product in the user's variable listing order.
inline std::string monomial_string(const Exponent& e, const VariableOrder& order) {
  std::string s;
  for (std::size_t k = 0; k < order.size(); ++k) {
    int a = e[order.internal(k)];
    if (a == 0) continue;
    if (!s.empty()) s += '*';
    s += order.names()[k];
    if (a > 1) s += '^' + std::to_string(a);
  }
  return s;
}

template <class C>
std::string to_string(const Polynomial<C>& p, const VariableOrder& order) {
  if (p.is_zero()) return "0";
  std::string s;
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    std::string cs = CoeffTraits<C>::str(c);
    bool neg = !cs.empty() && cs[0] == '-';
    if (neg) cs.erase(0, 1);
    if (first) {
      if (neg) s += '-';
    } else {
      s += neg ? " - " : " + ";
    }
    first = false;
    std::string m = monomial_string(e, order);
    if (m.empty()) {
      s += cs;
    } else {
      if (cs != "1") s += cs + '*';
      s += m;
    }
  }
  return s;
}

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

namespace detail {

// Recursive-descent parser for one polynomial expression with exact
// rational coefficients. Decimal literals are converted exactly.
class ExprParser {
 public:
  ExprParser(const std::string& text, const VariableOrder& order, int line, int col0)
      : s_(text), order_(order), line_(line), col0_(col0) {}

  QPoly parse() {
    skip();
    if (pos_ >= s_.size()) fail("empty expression");
    QPoly p = expr();
    skip();
    if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, col0_ + static_cast<int>(pos_) + 1);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  QPoly expr() {
    QPoly p = term();
    for (;;) {
      if (eat('+')) {
        p += term();
      } else if (eat('-')) {
        p -= term();
      } else {
        return p;
      }
    }
  }

  QPoly term() {
    QPoly p = factor();
    while (eat('*')) p = p * factor();
    return p;
  }

  QPoly factor() {
    if (eat('-')) return -factor();
    if (eat('+')) return factor();
    QPoly base = primary();
    if (eat('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer exponent");
      base = base.pow(std::stoi(s_.substr(start, pos_ - start)));
    }
    return base;
  }

  QPoly primary() {
    skip();
    const std::size_t n = order_.size();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      QPoly p = expr();
      if (!eat(')')) fail("expected ')'");
      return p;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      mpq_class v = number();
      skip();
      // a/b binds tighter than '*' so that 3/2*x reads as (3/2)*x
      if (pos_ < s_.size() && s_[pos_] == '/') {
        ++pos_;
        skip();
        mpq_class d = number();
        if (sgn(d) == 0) fail("division by zero");
        v /= d;
      }
      return QPoly::constant(n, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string name = s_.substr(start, pos_ - start);
      auto it = std::find(order_.names().begin(), order_.names().end(), name);
      if (it == order_.names().end()) {
        pos_ = start;
        fail("unknown variable '" + name + "'");
      }
      return QPoly::variable(n, order_.internal(static_cast<std::size_t>(it - order_.names().begin())));
    }
    fail(std::string("unexpected '") + c + "'");
  }

  mpq_class number() {
    std::size_t start = pos_;
    std::string digits;
    int scale = 0;
    bool dot = false;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || (s_[pos_] == '.' && !dot))) {
      if (s_[pos_] == '.') {
        dot = true;
      } else {
        digits += s_[pos_];
        if (dot) ++scale;
      }
      ++pos_;
    }
    if (digits.empty()) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      bool neg = false;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) neg = s_[pos_++] == '-';
      std::size_t es = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (es == pos_) {
        pos_ = save;
        fail("malformed exponent");
      }
      int ex = std::stoi(s_.substr(es, pos_ - es));
      scale += neg ? ex : -ex;
    }
    mpz_class num(digits, 10);
    mpq_class v(num);
    mpz_class ten = 10;
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(std::abs(scale)));
    if (scale > 0) v /= mpq_class(p);
    if (scale < 0) v *= mpq_class(p);
    v.canonicalize();
    return v;
  }

  const std::string& s_;
  const VariableOrder& order_;
  int line_;
  int col0_;
  std::size_t pos_ = 0;
};

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline QPoly parse_polynomial(const std::string& text, const VariableOrder& order) {
  return detail::ExprParser(text, order, 1, 0).parse();
}

struct ParsedSystem {
  VariableOrder order;
  std::vector<QPoly> generators;
  std::vector<QPoly> inequalities;

  const std::vector<std::string>& names() const { return order.names(); }
};

// Grammar: `vars:` names, optional `order:` a > b > c (largest first),
// `gen:` and `ineq:` expressions, `#` comments. A non-empty `order_override`
// replaces the file's order line.
inline ParsedSystem parse_system(const std::string& text, const std::vector<std::string>& order_override = {}) {
  ParsedSystem sys;
  std::vector<std::string> names;
  std::vector<std::string> order;
  std::vector<std::pair<std::string, std::pair<int, int>>> gens, ineqs;
  int order_line = 0;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw.substr(0, raw.find('#'));
    if (detail::trim(line).empty()) continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) throw ParseError("expected 'key: value'", lineno, 1);
    std::string key = detail::trim(line.substr(0, colon));
    std::string value = line.substr(colon + 1);
    int vcol = static_cast<int>(colon) + 1;
    if (key == "vars") {
      if (!names.empty()) throw ParseError("duplicate vars line", lineno, 1);
      std::istringstream vs(value);
      std::string v;
      while (vs >> v) {
        if (!(std::isalpha(static_cast<unsigned char>(v[0])) || v[0] == '_'))
          throw ParseError("bad variable name '" + v + "'", lineno, vcol + 1);
        if (std::find(names.begin(), names.end(), v) != names.end())
          throw ParseError("duplicate variable '" + v + "'", lineno, vcol + 1);
        names.push_back(v);
      }
      if (names.empty()) throw ParseError("no variables", lineno, vcol + 1);
    } else if (key == "order") {
      std::string rest = value;
      std::size_t p = 0;
      while (true) {
        std::size_t q = rest.find('>', p);
        std::string tok = detail::trim(rest.substr(p, q == std::string::npos ? std::string::npos : q - p));
        if (tok.empty()) throw ParseError("empty name in order", lineno, vcol + static_cast<int>(p) + 1);
        order.push_back(tok);
        if (q == std::string::npos) break;
        p = q + 1;
      }
      order_line = lineno;
    } else if (key == "gen") {
      gens.push_back({value, {lineno, vcol}});
    } else if (key == "ineq") {
      ineqs.push_back({value, {lineno, vcol}});
    } else {
      throw ParseError("unknown key '" + key + "'", lineno, 1);
    }
  }
  if (names.empty()) throw ParseError("missing vars line", lineno, 1);
  if (!order_override.empty()) {
    order = order_override;
    order_line = 0;
  }
  try {
    sys.order = order.empty() ? VariableOrder(names) : VariableOrder(names, order);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), order_line, 1);
  }
  for (const auto& [src, at] : gens) {
    QPoly p = detail::ExprParser(src, sys.order, at.first, at.second).parse();
    if (p.is_zero()) throw ParseError("zero generator", at.first, at.second);
    sys.generators.push_back(std::move(p));
  }
  for (const auto& [src, at] : ineqs) {
    QPoly p = detail::ExprParser(src, sys.order, at.first, at.second).parse();
    if (p.is_zero()) throw ParseError("zero inequality", at.first, at.second);
    sys.inequalities.push_back(std::move(p));
  }
  if (sys.generators.empty()) throw ParseError("no generators", lineno, 1);
  return sys;
}

inline std::string format_system(const ParsedSystem& sys) {
  std::string out = "vars:";
  for (const auto& v : sys.order.names()) out += ' ' + v;
  out += "\norder: ";
  auto lf = sys.order.largest_first();
  for (std::size_t i = 0; i < lf.size(); ++i) out += (i ? " > " : "") + lf[i];
  out += '\n';
  for (const auto& g : sys.generators) out += "gen: " + to_string(g, sys.order) + '\n';
  for (const auto& f : sys.inequalities) out += "ineq: " + to_string(f, sys.order) + '\n';
  return out;
}

}  // namespace realrad
