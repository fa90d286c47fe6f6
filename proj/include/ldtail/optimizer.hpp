#pragma once

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cstdint>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ldtail/error.hpp"
#include "ldtail/field.hpp"
#include "ldtail/functional.hpp"

namespace ldtail {

/// Noise level sigma, level exponent alpha and scale kappa of the event
/// G(sigma xi) > b with b = kappa sigma^alpha, plus the exponent epsilon of
/// the trust-region radius sigma^(alpha - 1 - epsilon).
struct AsymptoticParams {
  double sigma = 0.1;
  double alpha = 0.5;
  double kappa = 1.0;
  double epsilon = 0.05;
  double b = 0.0;

  AsymptoticParams() : b(kappa * std::pow(sigma, alpha)) {}
  AsymptoticParams(double sigma_, double alpha_, double kappa_, double epsilon_ = 0.05)
      : sigma(sigma_), alpha(alpha_), kappa(kappa_), epsilon(epsilon_), b(kappa_ * std::pow(sigma_, alpha_)) {
    validate();
  }

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("asymptotics.sigma must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("asymptotics.alpha must lie in (0, 1)");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidArgument("asymptotics.kappa must be non-negative");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("optimizer.epsilon must be positive");
  }

  double trust_radius() const { return std::pow(sigma, alpha - 1.0 - epsilon); }
};

struct OptimizerOptions {
  double tol_lambda = 1e-12;
  int max_inner = 100;
  double tol_xi = 1e-10;
  int max_outer = 200;
  HolderParams holder{};

  void validate() const {
    if (!(tol_lambda > 0.0)) throw InvalidArgument("optimizer.tol_lambda must be positive");
    if (!(tol_xi > 0.0)) throw InvalidArgument("optimizer.tol_xi must be positive");
    if (max_outer < 1) throw InvalidArgument("optimizer.max_outer must be at least 1");
    if (max_inner < 1) throw InvalidArgument("optimizer: inner iteration cap must be at least 1");
    holder.validate();
  }
};

struct KktSolution {
  ScalarField xi_star;
  double lambda_star = 0.0;
  double k_star = 0.0;
  double constraint_residual = 0.0;
  double fixed_point_residual = 0.0;
  int outer_iterations = 0;
  bool trust_region_ok = true;
  double holder_norm = 0.0;
  double trust_radius = 0.0;
  /// max-abs(xi_l - xi_{l-1}) per outer iteration.
  std::vector<double> step_trace;
  /// Inner lambda iterations used by each outer step.
  std::vector<int> inner_iterations;
  /// Outer steps whose lambda solve needed the bracketing fallback.
  int lambda_fallbacks = 0;
};

inline void require_nondegenerate(const Problem& problem) {
  if (!(problem.k_gprime0() > 1e-14)) {
    throw InvalidArgument("optimizer: K(G'[0]) = " + std::to_string(problem.k_gprime0()) +
                          " is not positive; the functional is degenerate");
  }
}

/// kappa sigma^(alpha-1) G'[0] / K(G'[0]).
inline ScalarField first_order_xi(const Problem& problem, const AsymptoticParams& params) {
  require_nondegenerate(problem);
  const double scale = params.kappa * std::pow(params.sigma, params.alpha - 1.0) / problem.k_gprime0();
  return scale * problem.gprime0();
}

/// The scalar map T_w for a fixed w. Holds C G'[sigma C w] so that each
/// lambda update costs one evaluation of G.
class LambdaMap {
 public:
  LambdaMap(const Problem& problem, const AsymptoticParams& params, const ScalarField& w)
      : LambdaMap(problem, params, ScalarField(), w, true) {}

  /// Uses a precomputed direction G'[sigma C w].
  static LambdaMap from_direction(const Problem& problem, const AsymptoticParams& params, ScalarField direction) {
    return LambdaMap(problem, params, std::move(direction), ScalarField(), false);
  }

  const ScalarField& direction() const noexcept { return direction_; }

  /// G(sigma C (lambda direction)) - b.
  double constraint_gap(double lambda) const {
    return problem_->value((params_.sigma * lambda) * c_direction_) - params_.b;
  }

  double operator()(double lambda) const {
    return lambda - constraint_gap(lambda) / (problem_->k_gprime0() * params_.sigma);
  }

 private:
  LambdaMap(const Problem& problem, const AsymptoticParams& params, ScalarField direction, const ScalarField& w,
            bool from_w)
      : problem_(&problem), params_(params) {
    require_nondegenerate(problem);
    if (from_w) {
      direction_ = frechet_G(problem, params.sigma * apply_C(problem.covariance(), w));
    } else {
      direction_ = std::move(direction);
    }
    c_direction_ = apply_C(problem.covariance(), direction_);
  }

  const Problem* problem_;
  AsymptoticParams params_;
  ScalarField direction_;
  ScalarField c_direction_;
};

inline double t_map(const Problem& problem, const AsymptoticParams& params, const ScalarField& w, double lambda) {
  return LambdaMap(problem, params, w)(lambda);
}

struct LambdaResult {
  double lambda = 0.0;
  double residual = 0.0;
  int iterations = 0;
  /// True when T_w stopped contracting and the root was bracketed instead.
  bool used_fallback = false;
  /// |T(l_k) - T(l_{k-1})| / |l_k - l_{k-1}| at the last T_w step.
  double contraction_estimate = 0.0;
};

namespace detail {

/// Brackets the root of the constraint gap and refines it with TOMS 748.
/// Returns nullopt when no sign change is found.
inline std::optional<double> bracket_lambda_root(const LambdaMap& map, double start, double gap_tol) {
  double lo = 0.0;
  double glo = map.constraint_gap(lo);
  if (glo == 0.0) return lo;
  const double dir = glo < 0.0 ? 1.0 : -1.0;
  double hi = dir * std::max(std::abs(start), 1e-3);
  double ghi = map.constraint_gap(hi);
  for (int k = 0; k < 80 && std::isfinite(ghi) && (ghi < 0.0) == (glo < 0.0); ++k) {
    lo = hi;
    glo = ghi;
    hi *= 2.0;
    ghi = map.constraint_gap(hi);
  }
  if (!std::isfinite(ghi) || (ghi < 0.0) == (glo < 0.0)) return std::nullopt;
  if (lo > hi) {
    std::swap(lo, hi);
    std::swap(glo, ghi);
  }
  auto gap = [&](double l) { return map.constraint_gap(l); };
  std::uintmax_t max_iter = 200;
  auto [a, b] = boost::math::tools::toms748_solve(gap, lo, hi, glo, ghi,
                                                  boost::math::tools::eps_tolerance<double>(52), max_iter);
  const double ga = std::abs(gap(a)), gb = std::abs(gap(b));
  const double best = ga <= gb ? a : b;
  if (std::min(ga, gb) > gap_tol) return std::nullopt;
  return best;
}

}  // namespace detail

/// Lambda[w]: the root of G(sigma C lambda G'[sigma C w]) = b.
///
/// Iterates T_w from kappa sigma^(alpha-1) / K(G'[0]) until the step is below
/// tol * max(1, |lambda|) and the constraint gap is below 1e-10 max(1, |b|).
/// The slope of T_w at the root is about 1 - K(G'[sigma C xi*]) / K(G'[0]),
/// which leaves (-1, 1) once b is of order 0.4; if T_w has not converged after
/// max_inner steps the same equation is solved by bracketing and TOMS 748, and
/// the result is flagged.
inline LambdaResult solve_lambda(const LambdaMap& map, const Problem& problem, const AsymptoticParams& params,
                                 const OptimizerOptions& opts = {}) {
  const double start = params.kappa * std::pow(params.sigma, params.alpha - 1.0) / problem.k_gprime0();
  double lambda = start;
  const double gap_tol = 1e-10 * std::max(1.0, std::abs(params.b));
  std::vector<double> trace;
  double gap = map.constraint_gap(lambda);
  auto rate = [&] {
    if (trace.size() >= 2 && trace[trace.size() - 2] > 0.0) return trace.back() / trace[trace.size() - 2];
    return 0.0;
  };
  for (int it = 1; it <= opts.max_inner; ++it) {
    const double next = lambda - gap / (problem.k_gprime0() * params.sigma);
    const double step = std::abs(next - lambda);
    trace.push_back(step);
    lambda = next;
    gap = map.constraint_gap(lambda);
    if (!std::isfinite(lambda) || !std::isfinite(gap)) break;
    if (step <= opts.tol_lambda * std::max(1.0, std::abs(lambda)) && std::abs(gap) <= gap_tol) {
      return {lambda, std::abs(gap), it, false, rate()};
    }
  }
  const double contraction = rate();
  if (auto root = detail::bracket_lambda_root(map, start, gap_tol)) {
    return {*root, std::abs(map.constraint_gap(*root)), opts.max_inner, true, contraction};
  }
  std::ostringstream msg;
  msg << "lambda iteration did not converge in " << opts.max_inner << " steps (constraint gap " << gap
      << ", contraction estimate " << contraction
      << ") and no bracketing root exists; sigma is likely too large for the asymptotic regime";
  throw ConvergenceError(msg.str(), std::move(trace), std::abs(gap));
}

inline double lambda_fixed_point(const Problem& problem, const AsymptoticParams& params, const ScalarField& w,
                                 const OptimizerOptions& opts = {}) {
  return solve_lambda(LambdaMap(problem, params, w), problem, params, opts).lambda;
}

/// Lambda[w] G'[sigma C w].
inline ScalarField xi_map(const Problem& problem, const AsymptoticParams& params, const ScalarField& w,
                          const OptimizerOptions& opts = {}) {
  LambdaMap map(problem, params, w);
  const double lambda = solve_lambda(map, problem, params, opts).lambda;
  return lambda * map.direction();
}

/// Outer iterations run at least ceil(2(1-alpha)/alpha) + 2 times.
inline int outer_iteration_floor(double alpha) {
  return static_cast<int>(std::ceil(2.0 * (1.0 - alpha) / alpha)) + 2;
}

/// Minimizes K(xi) subject to G(sigma C xi) = b by the nested fixed-point
/// iteration xi <- Lambda[xi] G'[sigma C xi], each Lambda solved to
/// convergence by iterating T_w.
inline KktSolution solve_kkt(const Problem& problem, const AsymptoticParams& params,
                             const OptimizerOptions& opts = {}) {
  params.validate();
  opts.validate();
  require_nondegenerate(problem);
  const CovarianceModel& cov = problem.covariance();
  const int floor = outer_iteration_floor(params.alpha);

  KktSolution sol;
  ScalarField xi = first_order_xi(problem, params);
  bool converged = false;
  for (int l = 1; l <= opts.max_outer; ++l) {
    LambdaMap map(problem, params, xi);
    const LambdaResult lr = solve_lambda(map, problem, params, opts);
    ScalarField next = lr.lambda * map.direction();
    const double step = (next - xi).max_abs();
    sol.step_trace.push_back(step);
    sol.inner_iterations.push_back(lr.iterations);
    if (lr.used_fallback) ++sol.lambda_fallbacks;
    sol.lambda_star = lr.lambda;
    xi = std::move(next);
    sol.outer_iterations = l;
    if (!xi.all_finite()) break;
    if (l >= floor && step <= opts.tol_xi * xi.max_abs()) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "outer iteration did not converge in " << sol.outer_iterations << " steps (last step "
        << (sol.step_trace.empty() ? 0.0 : sol.step_trace.back())
        << "); the map is not contracting at this sigma";
    throw ConvergenceError(msg.str(), sol.step_trace, sol.step_trace.empty() ? 0.0 : sol.step_trace.back());
  }

  sol.xi_star = xi;
  sol.k_star = k_energy(cov, xi);
  sol.constraint_residual = std::abs(problem.value(params.sigma * apply_C(cov, xi)) - params.b);
  sol.fixed_point_residual = (xi - xi_map(problem, params, xi, opts)).max_abs();
  sol.trust_radius = params.trust_radius();
  sol.holder_norm = holder_norm(*problem.grid(), xi, opts.holder);
  sol.trust_region_ok = sol.holder_norm <= sol.trust_radius;

  const double gap_tol = 1e-10 * std::max(1.0, std::abs(params.b));
  const double fp_tol = 1e-9 * xi.max_abs();
  if (sol.constraint_residual > gap_tol || sol.fixed_point_residual > fp_tol) {
    std::ostringstream msg;
    msg << "KKT residuals above tolerance: constraint " << sol.constraint_residual << " (tol " << gap_tol
        << "), fixed point " << sol.fixed_point_residual << " (tol " << fp_tol << ")";
    throw ConvergenceError(msg.str(), sol.step_trace, std::max(sol.constraint_residual, sol.fixed_point_residual));
  }
  return sol;
}

/// Largest ratio step_l / step_{l-1} over outer iterations whose previous step
/// was still above 1e-6 of the iterate size (ratios in the rounding floor are
/// skipped). Zero when no such pair exists.
inline double empirical_contraction(const KktSolution& sol) {
  const double scale = sol.xi_star.size() ? sol.xi_star.max_abs() : 0.0;
  double rate = 0.0;
  for (std::size_t l = 1; l < sol.step_trace.size(); ++l) {
    if (sol.step_trace[l - 1] >= 1e-6 * scale && sol.step_trace[l - 1] > 0.0) {
      rate = std::max(rate, sol.step_trace[l] / sol.step_trace[l - 1]);
    }
  }
  return rate;
}

}  // namespace ldtail
