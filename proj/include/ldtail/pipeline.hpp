#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ldtail/asymptotics.hpp"
#include "ldtail/config.hpp"
#include "ldtail/expression.hpp"
#include "ldtail/functional.hpp"
#include "ldtail/mc.hpp"
#include "ldtail/optimizer.hpp"

namespace ldtail {

using Json = nlohmann::ordered_json;

/// A JSON summary plus the CSV side files to write next to it.
struct Report {
  Json json;
  std::vector<std::pair<std::string, std::string>> files;
  bool ok = true;
};

inline Problem make_problem(const RunConfig& cfg) {
  auto grid = build_grid(cfg.bounds, cfg.n);
  FunctionalSpec spec;
  spec.kind = cfg.functional_kind;
  spec.weight = parse_field_expression(grid, cfg.weight);
  spec.mu = parse_field_expression(grid, cfg.mu);
  return Problem(grid, cfg.kernel, parse_field_expression(grid, cfg.a0), parse_field_expression(grid, cfg.f),
                 std::move(spec));
}

inline Json config_json(const RunConfig& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : cfg.entries) j[k] = v;
  return j;
}

inline Json grid_json(const Grid& g) {
  Json bounds = Json::array();
  for (const auto& b : g.bounds()) bounds.push_back({b.low, b.high});
  return {{"dim", g.dim()}, {"bounds", bounds}, {"n", g.counts()}};
}

inline std::string field_csv(const ScalarField& w, const std::string& name) {
  std::ostringstream os;
  write_csv(os, w, name);
  return os.str();
}

inline Json kkt_json(const KktSolution& s) {
  return {{"k_star", s.k_star},
          {"lambda_star", s.lambda_star},
          {"constraint_residual", s.constraint_residual},
          {"fixed_point_residual", s.fixed_point_residual},
          {"iterations", s.outer_iterations},
          {"inner_iterations", s.inner_iterations},
          {"lambda_fallbacks", s.lambda_fallbacks},
          {"step_trace", s.step_trace},
          {"contraction_factor", empirical_contraction(s)},
          {"holder_norm", s.holder_norm},
          {"trust_radius", s.trust_radius},
          {"trust_region_ok", s.trust_region_ok}};
}

inline Json tail_json(const TailEstimate& t) {
  return {{"sigma", t.sigma},     {"alpha", t.alpha},
          {"kappa", t.kappa},     {"b", t.b},
          {"k_star", t.k_star},   {"c1", t.c1},
          {"log_probability", t.log_probability},
          {"probability", t.probability},
          {"trust_region_ok", t.trust_region_ok},
          {"jitter", t.jitter}};
}

inline Json mc_json(const McEstimate& e) {
  return {{"method", to_string(e.method)},
          {"mean", e.mean},
          {"std_error", e.std_error},
          {"log_mean", e.log_mean},
          {"n", e.n},
          {"hits", e.hits},
          {"ci95", {e.ci95_low, e.ci95_high}},
          {"seed", e.seed},
          {"effective_sample_size", e.effective_sample_size},
          {"log_weight_min", e.log_weight_min},
          {"log_weight_max", e.log_weight_max},
          {"warnings", e.warnings}};
}

inline Json error_json(const std::exception& e) {
  Json j{{"message", e.what()}};
  if (auto* ce = dynamic_cast<const ConvergenceError*>(&e)) {
    j["trace"] = ce->trace();
    j["last_residual"] = ce->last_residual();
  }
  return j;
}

inline std::string samples_csv(const SampleLog& log) {
  std::ostringstream os;
  os << "sample_index,G_value,indicator,log_weight\n";
  char buf[96];
  for (std::size_t k = 0; k < log.g_value.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%d,%.17g\n", k, log.g_value[k], int(log.indicator[k]),
                  log.log_weight[k]);
    os << buf;
  }
  return os.str();
}

inline Report report_header(const std::string& command, const RunConfig& cfg, const Problem& problem) {
  Report r;
  r.json["command"] = command;
  r.json["config"] = config_json(cfg);
  r.json["grid"] = grid_json(*problem.grid());
  return r;
}

/// Deterministic problem at w = 0: u_0, g_0, G'[0] and the prefactor.
inline Report cmd_solve(const RunConfig& cfg) {
  const Problem problem = make_problem(cfg);
  Report r = report_header("solve", cfg, problem);
  const ScalarField zero(problem.grid());
  r.json["G_at_0"] = problem.value(zero);
  r.json["K_of_Gprime0"] = problem.k_gprime0();
  r.json["c1"] = prefactor_c1(problem, cfg.params);
  r.json["jitter"] = problem.covariance().jitter();
  if (cfg.emit_fields) {
    if (problem.kind() == FunctionalKind::linear_pde) {
      r.files.emplace_back("u0.csv", field_csv(problem.u0(), "u0"));
      r.files.emplace_back("g0.csv", field_csv(problem.g0(), "g0"));
    }
    r.files.emplace_back("gprime0.csv", field_csv(problem.gprime0(), "gprime0"));
  }
  return r;
}

inline Report cmd_optimize(const RunConfig& cfg) {
  const Problem problem = make_problem(cfg);
  Report r = report_header("optimize", cfg, problem);
  try {
    const KktSolution sol = solve_kkt(problem, cfg.params, cfg.optimizer);
    r.json["optimizer"] = kkt_json(sol);
    if (cfg.emit_fields) r.files.emplace_back("xi_star.csv", field_csv(sol.xi_star, "xi_star"));
  } catch (const ConvergenceError& e) {
    r.json["error"] = error_json(e);
    r.ok = false;
  }
  return r;
}

namespace detail {

/// Optimizer, tail formula and the configured estimators at one sigma.
inline Json estimate_record(const RunConfig& cfg, const Problem& problem, const AsymptoticParams& params,
                            Report& report, const std::string& file_suffix) {
  Json rec;
  const KktSolution sol = solve_kkt(problem, params, cfg.optimizer);
  const TailEstimate tail = tail_probability(sol, problem, params);
  rec["optimizer"] = kkt_json(sol);
  rec["asymptotic"] = tail_json(tail);
  Json mc = Json::object();
  Json ratio = Json::object();
  auto add = [&](const McEstimate& e, const SampleLog& log) {
    const std::string name = to_string(e.method);
    mc[name] = mc_json(e);
    ratio[name] = e.mean / tail.probability;
    if (cfg.emit_samples) report.files.emplace_back("samples_" + name + file_suffix + ".csv", samples_csv(log));
  };
  SampleLog log;
  if (cfg.run_crude) add(crude_mc(problem, params, cfg.mc, cfg.emit_samples ? &log : nullptr), log);
  if (cfg.run_importance) add(importance_sampling(problem, params, sol, cfg.mc, cfg.emit_samples ? &log : nullptr), log);
  rec["mc"] = mc;
  rec["ratio"] = ratio;
  if (cfg.emit_fields) report.files.emplace_back("xi_star" + file_suffix + ".csv", field_csv(sol.xi_star, "xi_star"));
  return rec;
}

}  // namespace detail

inline Report cmd_estimate(const RunConfig& cfg) {
  const Problem problem = make_problem(cfg);
  Report r = report_header("estimate", cfg, problem);
  try {
    Json rec = detail::estimate_record(cfg, problem, cfg.params, r, "");
    for (auto& [k, v] : rec.items()) r.json[k] = v;
  } catch (const ConvergenceError& e) {
    r.json["error"] = error_json(e);
    r.ok = false;
  }
  return r;
}

/// cmd_estimate at each sigma in sweep.sigmas (alpha, kappa fixed).
inline Report cmd_sweep(const RunConfig& cfg) {
  const Problem problem = make_problem(cfg);
  Report r = report_header("sweep", cfg, problem);
  Json records = Json::array();
  for (std::size_t k = 0; k < cfg.sweep_sigmas.size(); ++k) {
    const AsymptoticParams params(cfg.sweep_sigmas[k], cfg.params.alpha, cfg.params.kappa, cfg.params.epsilon);
    Json rec{{"sigma", params.sigma}};
    try {
      Json body = detail::estimate_record(cfg, problem, params, r, "_" + std::to_string(k));
      for (auto& [key, v] : body.items()) rec[key] = v;
    } catch (const ConvergenceError& e) {
      rec["error"] = error_json(e);
      r.ok = false;
    }
    records.push_back(std::move(rec));
  }
  r.json["records"] = std::move(records);
  return r;
}

inline Report run_command(const std::string& command, const RunConfig& cfg) {
  if (command == "solve") return cmd_solve(cfg);
  if (command == "optimize") return cmd_optimize(cfg);
  if (command == "estimate") return cmd_estimate(cfg);
  if (command == "sweep") return cmd_sweep(cfg);
  throw InvalidArgument("unknown command '" + command + "'");
}

/// Writes <command>.json and the side files into `dir`.
inline void write_report(const Report& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream os(base / (r.json.at("command").get<std::string>() + ".json"));
    os << r.json.dump(2) << '\n';
  }
  for (const auto& [name, content] : r.files) {
    std::ofstream os(base / name);
    os << content;
  }
}

}  // namespace ldtail
