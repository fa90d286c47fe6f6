#pragma once

// Standard problems shared by the test suites.

#include "ldtail/functional.hpp"
#include "ldtail/random.hpp"

namespace ldtail::fixture {

inline const CovarianceKernel kSmooth{KernelKind::squared_exponential, 0.2};
inline const CovarianceKernel kFlat{KernelKind::squared_exponential, 1e6};

/// a0 = 1, f = 1 on (0,1) with a constant functional weight.
inline Problem linear_pde(std::size_t n = 65, CovarianceKernel kernel = kSmooth, double weight = 1.0) {
  auto g = build_grid({{0.0, 1.0}}, {n});
  return Problem(g, kernel, ScalarField(g, 1.0), ScalarField(g, 1.0),
                 {FunctionalKind::linear_pde, ScalarField(g, weight), ScalarField(g)});
}

/// Integral of exp(w + mu) - exp(mu) on (0,1) with constant mu.
inline Problem exp_integral(std::size_t n = 65, CovarianceKernel kernel = kSmooth, double mu = 0.0) {
  auto g = build_grid({{0.0, 1.0}}, {n});
  return Problem(g, kernel, ScalarField(g, 1.0), ScalarField(g, 1.0),
                 {FunctionalKind::exp_integral, ScalarField(g), ScalarField(g, mu)});
}

inline ScalarField gaussian_field(const GridPtr& g, RandomStream& rs, double scale = 1.0) {
  ScalarField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = scale * rs.normal();
  return f;
}

}  // namespace ldtail::fixture
