#pragma once

#include <cmath>
#include <numbers>

#include "ldtail/functional.hpp"
#include "ldtail/optimizer.hpp"

namespace ldtail {

struct TailEstimate {
  double probability = 0.0;
  double log_probability = 0.0;
  double c1 = 0.0;
  double k_star = 0.0;
  double sigma = 0.0;
  double alpha = 0.0;
  double kappa = 0.0;
  double b = 0.0;
  bool trust_region_ok = true;
  double jitter = 0.0;
};

/// kappa^{-1} sqrt(K(G'[0]) / (2 pi)). For linear_pde G'[0] is the adjoint
/// product a_0 grad g_0 . grad u_0, so this is also the PDE prefactor.
inline double prefactor_c1(const Problem& problem, const AsymptoticParams& params) {
  require_nondegenerate(problem);
  return std::sqrt(problem.k_gprime0() / (2.0 * std::numbers::pi)) / params.kappa;
}

/// c1 sigma^(1-alpha) exp(-K*/2), evaluated in log space.
inline TailEstimate tail_probability(const KktSolution& solution, const Problem& problem,
                                     const AsymptoticParams& params) {
  TailEstimate t;
  t.c1 = prefactor_c1(problem, params);
  t.k_star = solution.k_star;
  t.sigma = params.sigma;
  t.alpha = params.alpha;
  t.kappa = params.kappa;
  t.b = params.b;
  t.trust_region_ok = solution.trust_region_ok;
  t.jitter = problem.covariance().jitter();
  t.log_probability = std::log(t.c1) + (1.0 - params.alpha) * std::log(params.sigma) - 0.5 * solution.k_star;
  t.probability = std::min(1.0, std::exp(t.log_probability));
  return t;
}

}  // namespace ldtail
