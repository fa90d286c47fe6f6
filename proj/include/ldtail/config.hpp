#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ldtail/covariance.hpp"
#include "ldtail/error.hpp"
#include "ldtail/expression.hpp"
#include "ldtail/functional.hpp"
#include "ldtail/grid.hpp"
#include "ldtail/mc.hpp"
#include "ldtail/optimizer.hpp"

namespace ldtail {

/// Every accepted key with its default value, in report order.
inline const std::vector<std::pair<std::string, std::string>>& config_defaults() {
  static const std::vector<std::pair<std::string, std::string>> defaults{
      {"grid.bounds", "0,1"},
      {"grid.n", "65"},
      {"kernel.kind", "squared_exponential"},
      {"kernel.length_scale", "0.2"},
      {"pde.a0", "constant:1"},
      {"pde.f", "constant:1"},
      {"functional.kind", "linear_pde"},
      {"functional.weight", "constant:1"},
      {"functional.mu", "constant:0"},
      {"asymptotics.sigma", "0.1"},
      {"asymptotics.alpha", "0.5"},
      {"asymptotics.kappa", "1"},
      {"optimizer.tol_lambda", "1e-12"},
      {"optimizer.tol_xi", "1e-10"},
      {"optimizer.max_outer", "200"},
      {"optimizer.epsilon", "0.05"},
      {"optimizer.holder_k", "0"},
      {"optimizer.holder_beta", "0"},
      {"mc.n", "10000"},
      {"mc.seed", "1"},
      {"mc.workers", "1"},
      {"mc.method", "importance"},
      {"output.dir", "."},
      {"output.emit_fields", "true"},
      {"output.emit_samples", "false"},
      {"sweep.sigmas", "0.2,0.1,0.05"},
  };
  return defaults;
}

/// Validated configuration. `entries` keeps the effective key = value text
/// (defaults filled in) so a report can embed and reproduce it.
struct RunConfig {
  std::vector<std::pair<std::string, std::string>> entries;

  std::vector<AxisBounds> bounds;
  std::vector<std::size_t> n;
  CovarianceKernel kernel;
  std::string a0, f;
  FunctionalKind functional_kind = FunctionalKind::linear_pde;
  std::string weight, mu;
  AsymptoticParams params;
  OptimizerOptions optimizer;
  McOptions mc;
  bool run_crude = false;
  bool run_importance = true;
  std::string method;
  std::string output_dir;
  bool emit_fields = true;
  bool emit_samples = false;
  std::vector<double> sweep_sigmas;

  const std::string& get(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return v;
    throw InvalidArgument("config: unknown key '" + key + "'");
  }

  std::string to_text() const {
    std::string out;
    for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
    return out;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d)) {
    throw InvalidArgument(key + ": expected a number, got '" + v + "'");
  }
  return d;
}

inline long long to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) {
    throw InvalidArgument(key + ": expected an integer, got '" + v + "'");
  }
  return i;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw InvalidArgument(key + ": expected true or false, got '" + v + "'");
}

template <class Fn>
auto with_key(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    if (what.rfind(key, 0) == 0) throw;
    throw InvalidArgument(key + ": " + what);
  }
}

}  // namespace detail

/// Builds a RunConfig from key = value overrides on top of the defaults.
/// Every value is parsed and range-checked here, before any computation.
inline RunConfig make_config(const std::vector<std::pair<std::string, std::string>>& overrides) {
  using namespace detail;
  RunConfig cfg;
  cfg.entries = config_defaults();
  for (const auto& [key, value] : overrides) {
    bool found = false;
    for (auto& [k, v] : cfg.entries) {
      if (k == key) {
        v = value;
        found = true;
      }
    }
    if (!found) throw InvalidArgument("config: unknown key '" + key + "'");
  }
  auto get = [&](const std::string& k) -> const std::string& { return cfg.get(k); };

  with_key("grid.bounds", [&] {
    for (const auto& axis : split(get("grid.bounds"), ';')) {
      auto lh = split(axis, ',');
      if (lh.size() != 2) throw InvalidArgument("grid.bounds: expected 'low,high' per axis separated by ';'");
      cfg.bounds.push_back({to_double("grid.bounds", lh[0]), to_double("grid.bounds", lh[1])});
    }
    return 0;
  });
  with_key("grid.n", [&] {
    for (const auto& s : split(get("grid.n"), ',')) {
      const long long k = to_int("grid.n", s);
      if (k < 3) throw InvalidArgument("grid.n: every axis needs at least 3 nodes");
      cfg.n.push_back(static_cast<std::size_t>(k));
    }
    return 0;
  });
  if (cfg.n.size() != cfg.bounds.size()) {
    throw InvalidArgument("grid.n: " + std::to_string(cfg.n.size()) + " counts for " +
                          std::to_string(cfg.bounds.size()) + " axes in grid.bounds");
  }
  with_key("grid.bounds", [&] { return build_grid(cfg.bounds, cfg.n); });

  cfg.kernel.kind = with_key("kernel.kind", [&] { return parse_kernel_kind(get("kernel.kind")); });
  cfg.kernel.length_scale = to_double("kernel.length_scale", get("kernel.length_scale"));
  with_key("kernel.length_scale", [&] {
    cfg.kernel.validate();
    return 0;
  });

  cfg.a0 = get("pde.a0");
  cfg.f = get("pde.f");
  cfg.functional_kind = with_key("functional.kind", [&] { return parse_functional_kind(get("functional.kind")); });
  cfg.weight = get("functional.weight");
  cfg.mu = get("functional.mu");
  {
    auto probe = build_grid(cfg.bounds, cfg.n);
    for (const char* key : {"pde.a0", "pde.f", "functional.weight", "functional.mu"}) {
      with_key(key, [&] { return parse_field_expression(probe, get(key)); });
    }
  }

  const double sigma = to_double("asymptotics.sigma", get("asymptotics.sigma"));
  const double alpha = to_double("asymptotics.alpha", get("asymptotics.alpha"));
  const double kappa = to_double("asymptotics.kappa", get("asymptotics.kappa"));
  const double epsilon = to_double("optimizer.epsilon", get("optimizer.epsilon"));
  if (!(sigma > 0.0)) throw InvalidArgument("asymptotics.sigma must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("asymptotics.alpha must lie in (0, 1)");
  if (!(kappa >= 0.0)) throw InvalidArgument("asymptotics.kappa must be non-negative");
  if (!(epsilon > 0.0)) throw InvalidArgument("optimizer.epsilon must be positive");
  cfg.params = AsymptoticParams(sigma, alpha, kappa, epsilon);

  cfg.optimizer.tol_lambda = to_double("optimizer.tol_lambda", get("optimizer.tol_lambda"));
  cfg.optimizer.tol_xi = to_double("optimizer.tol_xi", get("optimizer.tol_xi"));
  cfg.optimizer.max_outer = static_cast<int>(to_int("optimizer.max_outer", get("optimizer.max_outer")));
  cfg.optimizer.holder.k = static_cast<int>(to_int("optimizer.holder_k", get("optimizer.holder_k")));
  cfg.optimizer.holder.beta = to_double("optimizer.holder_beta", get("optimizer.holder_beta"));
  if (!(cfg.optimizer.tol_lambda > 0.0)) throw InvalidArgument("optimizer.tol_lambda must be positive");
  if (!(cfg.optimizer.tol_xi > 0.0)) throw InvalidArgument("optimizer.tol_xi must be positive");
  if (cfg.optimizer.max_outer < 1) throw InvalidArgument("optimizer.max_outer must be at least 1");
  if (cfg.optimizer.holder.k != 0 && cfg.optimizer.holder.k != 1) {
    throw InvalidArgument("optimizer.holder_k must be 0 or 1");
  }
  if (!(cfg.optimizer.holder.beta >= 0.0 && cfg.optimizer.holder.beta < 1.0)) {
    throw InvalidArgument("optimizer.holder_beta must lie in [0, 1)");
  }

  cfg.mc.n = to_int("mc.n", get("mc.n"));
  if (cfg.mc.n < 1) throw InvalidArgument("mc.n must be at least 1");
  const long long seed = to_int("mc.seed", get("mc.seed"));
  if (seed < 0) throw InvalidArgument("mc.seed must be non-negative");
  cfg.mc.seed = static_cast<std::uint64_t>(seed);
  const long long workers = to_int("mc.workers", get("mc.workers"));
  if (workers < 1 || workers > 256) throw InvalidArgument("mc.workers must lie in [1, 256]");
  cfg.mc.workers = static_cast<int>(workers);
  cfg.method = get("mc.method");
  if (cfg.method == "crude") {
    cfg.run_crude = true;
    cfg.run_importance = false;
  } else if (cfg.method == "importance") {
    cfg.run_crude = false;
    cfg.run_importance = true;
  } else if (cfg.method == "both") {
    cfg.run_crude = cfg.run_importance = true;
  } else {
    throw InvalidArgument("mc.method must be crude, importance or both, got '" + cfg.method + "'");
  }

  cfg.output_dir = get("output.dir");
  cfg.emit_fields = to_bool("output.emit_fields", get("output.emit_fields"));
  cfg.emit_samples = to_bool("output.emit_samples", get("output.emit_samples"));

  for (const auto& s : split(get("sweep.sigmas"), ',')) {
    const double v = to_double("sweep.sigmas", s);
    if (!(v > 0.0)) throw InvalidArgument("sweep.sigmas: every sigma must be positive");
    cfg.sweep_sigmas.push_back(v);
  }
  return cfg;
}

/// Reads "key = value" lines; '#' starts a comment; blank lines are skipped.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
    for (const auto& [k, v] : out) {
      if (k == key) throw InvalidArgument("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline RunConfig parse_config(std::istream& is) { return make_config(parse_config_text(is)); }

inline RunConfig parse_config(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

}  // namespace ldtail
