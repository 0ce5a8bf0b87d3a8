// Command-line front end: certify the real radical of a polynomial system.

#include "realrad/pipeline.hpp"
#include "realrad/report_json.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One row per new variable, entries over the listed variables, rationals allowed.
realrad::RationalMatrix read_matrix(const std::string& path) {
  std::istringstream in(slurp(path));
  realrad::RationalMatrix A;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    std::istringstream ls(line);
    std::vector<mpq_class> row;
    std::string tok;
    while (ls >> tok) {
      mpq_class q;
      if (q.set_str(tok, 10) != 0) throw std::runtime_error("bad matrix entry '" + tok + "'");
      q.canonicalize();
      row.push_back(q);
    }
    if (!row.empty()) A.push_back(std::move(row));
  }
  return A;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("realrad");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("REALRAD_LOG");
  std::string level = env ? env : "quiet";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::warn);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certify the real radical of a polynomial ideal by moment relaxations"};
  std::string input;
  double tol = 1e-8;
  std::optional<int> tmax, tstart;
  std::string ball = "off";
  std::uint64_t seed = 0;
  bool json = false;
  bool auto_retry = false;
  std::string coord_file;
  std::string method = "staircase";
  std::string order_text;
  std::string output = "table";
  double rational_tol = 1e-6;

  app.add_option("input", input, "system file ('-' for stdin)")->required();
  app.add_option("--tol", tol, "rank threshold tau, in (0, 0.1)")
      ->check(CLI::Validator(
          [](std::string& v) {
            char* end = nullptr;
            double x = std::strtod(v.c_str(), &end);
            return *end == '\0' && x > 0.0 && x < 0.1 ? std::string() : std::string("tolerance must lie in (0, 0.1)");
          },
          "(0, 0.1)"));
  app.add_option("--tmax", tmax, "largest relaxation order (default 2d+8)");
  app.add_option("--tstart", tstart, "first relaxation order (default 2d)");
  app.add_option("--ball", ball, "radius of a bounding ball constraint, or 'off'");
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--json", json, "print the report as JSON (same as --output json)");
  app.add_option("--output", output, "report format")->check(CLI::IsMember({"table", "json", "both"}));
  app.add_option("--order", order_text, "variable order, largest first, e.g. \"x3 > x1 > x2\"");
  app.add_option("--coord-change", coord_file, "file with an invertible matrix A, new variables = A x");
  app.add_flag("--auto-retry", auto_retry, "retry with random coordinate changes if the certificate never holds");
  app.add_option("--method", method, "kernel basis method")->check(CLI::IsMember({"rref", "staircase"}));
  app.add_option("--rational-tol", rational_tol, "tolerance for rational reconstruction");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  configure_logging();
  try {
    std::vector<std::string> order_override;
    if (!order_text.empty()) {
      std::stringstream os(order_text);
      std::string tok;
      while (std::getline(os, tok, '>')) {
        auto b = tok.find_first_not_of(" \t");
        auto e = tok.find_last_not_of(" \t");
        if (b == std::string::npos) throw std::invalid_argument("empty name in --order");
        order_override.push_back(tok.substr(b, e - b + 1));
      }
    }
    realrad::ParsedSystem sys = realrad::parse_system(slurp(input), order_override);
    realrad::RunOptions opt;
    opt.tau = tol;
    opt.t_max = tmax;
    opt.t_start = tstart;
    if (ball != "off") {
      std::size_t used = 0;
      double R = std::stod(ball, &used);
      if (used != ball.size() || !(R > 0.0)) throw std::invalid_argument("--ball expects a positive radius or 'off'");
      opt.ball = R;
    }
    opt.seed = seed;
    opt.auto_retry = auto_retry;
    opt.method = method == "staircase" ? realrad::KernelMethod::Staircase : realrad::KernelMethod::Rref;
    opt.rational_tol = rational_tol;

    realrad::ProblemSpec spec = realrad::make_spec(sys, opt);
    if (!coord_file.empty()) {
      spec = realrad::apply_coordinate_change(spec, read_matrix(coord_file));
      spdlog::info("transformed system:");
      for (const auto& g : spec.generators) spdlog::info("  {}", realrad::to_string(g, spec.order));
    }
    spdlog::info("{} variables, {} generators, {} inequalities, tau={}", spec.nvars(), spec.generators.size(),
                 spec.inequalities.size(), tol);

    auto report = realrad::run(spec, [](const realrad::OrderRecord& r) {
      spdlog::info("{}", realrad::format_record(r));
      spdlog::debug("solver: {} residual={:.2e} min_eig={:.2e} iterations={} shift={:.2e}", r.solver.status,
                    r.solver.eq_residual, r.solver.min_eig, r.solver.iterations, r.solver.shift);
    });
    if (json) output = "json";
    if (output != "json") std::cout << realrad::format_report(report);
    if (output != "table") std::cout << realrad::report_to_json(report).dump(2) << "\n";
    switch (report.status) {
      case realrad::RunStatus::Certified: return 0;
      case realrad::RunStatus::ExhaustedT: return 2;
      case realrad::RunStatus::Infeasible: return 3;
    }
  } catch (const realrad::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
