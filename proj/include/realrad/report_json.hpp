// JSON form of a certificate report. Polynomials are written as strings in
// the user's variable names and parsed back on load.
#pragma once

#include "realrad/pipeline.hpp"

#include <json.hpp>

namespace realrad {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline ordered_json poly_list(const std::vector<RPoly>& v, const VariableOrder& order) {
  ordered_json a = ordered_json::array();
  for (const auto& p : v) a.push_back(to_string(p, order));
  return a;
}

inline ordered_json poly_list(const std::vector<QPoly>& v, const VariableOrder& order) {
  ordered_json a = ordered_json::array();
  for (const auto& p : v) a.push_back(to_string(p, order));
  return a;
}

inline ordered_json solver_json(const SolverDiagnostics& s) {
  return ordered_json{{"status", s.status},         {"eq_residual", s.eq_residual}, {"min_eig", s.min_eig},
                      {"iterations", s.iterations}, {"seed", s.seed},               {"shift", s.shift}};
}

inline SolverDiagnostics solver_from(const ordered_json& j) {
  SolverDiagnostics s;
  s.status = j.at("status").get<std::string>();
  s.eq_residual = j.at("eq_residual").get<double>();
  s.min_eig = j.at("min_eig").get<double>();
  s.iterations = j.at("iterations").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.shift = j.at("shift").get<double>();
  return s;
}

}  // namespace detail

inline ordered_json report_to_json(const CertificateReport& r) {
  ordered_json j;
  j["status"] = to_string(r.status);
  j["certified_t"] = r.certified_t ? ordered_json(*r.certified_t) : ordered_json(nullptr);
  j["variables"] = r.order.names();
  j["order"] = r.order.largest_first();
  j["tau"] = r.tau;
  ordered_json recs = ordered_json::array();
  for (const auto& rec : r.records) {
    recs.push_back(ordered_json{{"t", rec.t},
                                {"rank", rec.rank},
                                {"corank", rec.corank},
                                {"alpha", rec.alpha},
                                {"weighted_sum", rec.weighted_sum},
                                {"corank_diff", rec.corank_diff},
                                {"pass", rec.pass},
                                {"vacuous", rec.vacuous},
                                {"truncation_consistent", rec.truncation_consistent},
                                {"solver", detail::solver_json(rec.solver)}});
  }
  j["records"] = recs;
  j["system"] = detail::poly_list(r.system, r.order);
  j["weak_basis"] = detail::poly_list(r.weak_basis, r.order);
  j["strong_basis"] = detail::poly_list(r.strong_basis, r.order);
  j["rationalized"] = r.rationalized.empty() ? ordered_json(nullptr) : detail::poly_list(r.rationalized, r.order);
  if (r.coordinate_change) {
    ordered_json A = ordered_json::array();
    for (const auto& row : *r.coordinate_change) {
      ordered_json jr = ordered_json::array();
      for (const auto& a : row) jr.push_back(a.get_str());
      A.push_back(jr);
    }
    j["coordinate_change"] = A;
  } else {
    j["coordinate_change"] = nullptr;
  }
  j["solver"] = r.records.empty() ? ordered_json(nullptr) : detail::solver_json(r.records.back().solver);
  return j;
}

inline CertificateReport report_from_json(const ordered_json& j) {
  CertificateReport r;
  const std::string st = j.at("status").get<std::string>();
  if (st == "CERTIFIED") {
    r.status = RunStatus::Certified;
  } else if (st == "EXHAUSTED_T") {
    r.status = RunStatus::ExhaustedT;
  } else if (st == "INFEASIBLE") {
    r.status = RunStatus::Infeasible;
  } else {
    throw std::invalid_argument("unknown status " + st);
  }
  if (!j.at("certified_t").is_null()) r.certified_t = j.at("certified_t").get<int>();
  r.order = VariableOrder(j.at("variables").get<std::vector<std::string>>(),
                          j.at("order").get<std::vector<std::string>>());
  r.tau = j.at("tau").get<double>();
  for (const auto& jr : j.at("records")) {
    OrderRecord rec;
    rec.t = jr.at("t").get<int>();
    rec.rank = jr.at("rank").get<std::array<int, 3>>();
    rec.corank = jr.at("corank").get<std::array<int, 3>>();
    rec.alpha = jr.at("alpha").get<std::vector<int>>();
    rec.weighted_sum = jr.at("weighted_sum").get<int>();
    rec.corank_diff = jr.at("corank_diff").get<int>();
    rec.pass = jr.at("pass").get<bool>();
    rec.vacuous = jr.at("vacuous").get<bool>();
    rec.truncation_consistent = jr.at("truncation_consistent").get<bool>();
    rec.solver = detail::solver_from(jr.at("solver"));
    r.records.push_back(std::move(rec));
  }
  auto qlist = [&](const ordered_json& a) {
    std::vector<QPoly> out;
    for (const auto& s : a) out.push_back(parse_polynomial(s.get<std::string>(), r.order));
    return out;
  };
  auto rlist = [&](const ordered_json& a) {
    std::vector<RPoly> out;
    for (const auto& q : qlist(a)) out.push_back(to_double(q));
    return out;
  };
  r.system = qlist(j.at("system"));
  r.weak_basis = rlist(j.at("weak_basis"));
  r.strong_basis = rlist(j.at("strong_basis"));
  if (!j.at("rationalized").is_null()) r.rationalized = qlist(j.at("rationalized"));
  if (!j.at("coordinate_change").is_null()) {
    RationalMatrix A;
    for (const auto& jr : j.at("coordinate_change")) {
      std::vector<mpq_class> row;
      for (const auto& a : jr) row.emplace_back(a.get<std::string>());
      A.push_back(std::move(row));
    }
    for (auto& row : A)
      for (auto& a : row) a.canonicalize();
    r.coordinate_change = std::move(A);
  }
  return r;
}

}  // namespace realrad
