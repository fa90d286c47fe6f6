#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "ldtail/covariance.hpp"
#include "ldtail/error.hpp"
#include "ldtail/field.hpp"
#include "ldtail/pde.hpp"

namespace ldtail {

enum class FunctionalKind { linear_pde, exp_integral };

inline std::string to_string(FunctionalKind k) {
  return k == FunctionalKind::linear_pde ? "linear_pde" : "exp_integral";
}

inline FunctionalKind parse_functional_kind(const std::string& s) {
  if (s == "linear_pde") return FunctionalKind::linear_pde;
  if (s == "exp_integral") return FunctionalKind::exp_integral;
  throw InvalidArgument("unknown functional kind '" + s + "'");
}

/// linear_pde:   G(w) = integral of weight * (u_w - u_0), u_w solving the PDE
///               with coefficient a_0 exp(-w).
/// exp_integral: G(w) = integral of exp(w + mu) - integral of exp(mu).
/// Both satisfy G(0) = 0 by construction.
struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::linear_pde;
  ScalarField weight;
  ScalarField mu;
};

struct GEvaluation {
  double value = 0.0;
  ScalarField derivative;
  ScalarField u_w;  // linear_pde only
  ScalarField g_w;  // linear_pde only
};

/// Everything that defines G(w) and the Gaussian model of xi: grid, base
/// coefficient a_0, load f, the functional, and the covariance. Immutable
/// after construction and cheap to copy (the covariance is shared).
class Problem {
 public:
  Problem(GridPtr grid, CovarianceKernel kernel, ScalarField a0, ScalarField f, FunctionalSpec functional)
      : Problem(grid, std::make_shared<const CovarianceModel>(grid, kernel), std::move(a0), std::move(f),
                std::move(functional)) {}

  Problem(GridPtr grid, std::shared_ptr<const CovarianceModel> covariance, ScalarField a0, ScalarField f,
          FunctionalSpec functional)
      : grid_(std::move(grid)),
        covariance_(std::move(covariance)),
        a0_(std::move(a0)),
        f_(std::move(f)),
        spec_(std::move(functional)) {
    if (!covariance_ || !same_grid(covariance_->grid(), grid_)) {
      throw InvalidArgument("problem: covariance model lives on a different grid");
    }
    if (spec_.kind == FunctionalKind::linear_pde) {
      check_on_grid(*grid_, a0_);
      check_on_grid(*grid_, f_);
      check_on_grid(*grid_, spec_.weight);
      if (!spec_.weight.all_finite() || spec_.weight.max_abs() == 0.0) {
        throw InvalidArgument("problem: functional weight must be finite and not identically zero");
      }
      u0_ = EllipticOperator(grid_, a0_).solve(f_);
    } else {
      check_on_grid(*grid_, spec_.mu);
      if (!spec_.mu.all_finite()) throw InvalidArgument("problem: mu must be finite");
      exp_mu_ = spec_.mu.map([](double m) { return std::exp(m); });
    }
    GEvaluation at_zero = evaluate(ScalarField(grid_));
    gprime0_ = std::move(at_zero.derivative);
    g0_ = std::move(at_zero.g_w);
    if (!(gprime0_.max_abs() > 1e-12)) {
      throw InvalidArgument("problem: G'[0] vanishes identically; the functional is degenerate");
    }
    k_gprime0_ = k_energy(*covariance_, gprime0_);
  }

  const GridPtr& grid() const noexcept { return grid_; }
  const CovarianceModel& covariance() const noexcept { return *covariance_; }
  const std::shared_ptr<const CovarianceModel>& covariance_ptr() const noexcept { return covariance_; }
  const ScalarField& a0() const noexcept { return a0_; }
  const ScalarField& f() const noexcept { return f_; }
  const FunctionalSpec& functional() const noexcept { return spec_; }
  FunctionalKind kind() const noexcept { return spec_.kind; }

  /// u_0 and g_0 (linear_pde only; empty fields otherwise).
  const ScalarField& u0() const noexcept { return u0_; }
  const ScalarField& g0() const noexcept { return g0_; }
  const ScalarField& gprime0() const noexcept { return gprime0_; }
  double k_gprime0() const noexcept { return k_gprime0_; }

  ScalarField coefficient(const ScalarField& w) const {
    ScalarField a(a0_);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= std::exp(-w[i]);
    return a;
  }

  double value(const ScalarField& w) const {
    check_on_grid(*grid_, w);
    auto q = grid_->weights();
    double s = 0.0;
    if (spec_.kind == FunctionalKind::exp_integral) {
      for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * exp_mu_[i] * std::expm1(w[i]);
      return s;
    }
    const ScalarField u = EllipticOperator(grid_, coefficient(w)).solve(f_);
    for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * spec_.weight[i] * (u[i] - u0_[i]);
    return s;
  }

  /// Value and Fréchet derivative density at w, so that
  /// G(w + e h) = G(w) + e <G'[w], h> + O(e^2) in the quadrature inner product.
  ///
  /// For linear_pde the derivative is the adjoint-state product
  /// a_w grad g_w . grad u_w assembled edge by edge from the same harmonic-mean
  /// fluxes the solver uses, which makes it the exact gradient of the discrete
  /// G. See frechet_nodal for the pointwise-gradient variant.
  GEvaluation evaluate(const ScalarField& w) const {
    check_on_grid(*grid_, w);
    GEvaluation out;
    if (spec_.kind == FunctionalKind::exp_integral) {
      out.value = value(w);
      out.derivative = ScalarField(grid_);
      for (std::size_t i = 0; i < w.size(); ++i) out.derivative[i] = std::exp(w[i] + spec_.mu[i]);
      return out;
    }
    const EllipticOperator op(grid_, coefficient(w));
    out.u_w = op.solve(f_);
    out.g_w = op.solve(spec_.weight);
    auto q = grid_->weights();
    for (std::size_t i = 0; i < q.size(); ++i) out.value += q[i] * spec_.weight[i] * (out.u_w[i] - u0_[i]);

    // The adjoint with quadrature-weighted load is interior_weight * g_w,
    // since interior trapezoid weights are all equal.
    double interior_weight = 1.0;
    for (int ax = 0; ax < grid_->dim(); ++ax) interior_weight *= grid_->h(ax);
    const ScalarField& a = op.coefficient();
    const ScalarField& u = out.u_w;
    const ScalarField& g = out.g_w;
    ScalarField grad(grid_);
    for (const auto& e : op.edges()) {
      const double h = grid_->h(e.axis);
      const double al = a[e.lo], ah = a[e.hi];
      const double flux = interior_weight * (g[e.lo] - g[e.hi]) * (u[e.lo] - u[e.hi]) / (h * h);
      const double denom = (al + ah) * (al + ah);
      grad[e.lo] += 2.0 * al * ah * ah / denom * flux;
      grad[e.hi] += 2.0 * ah * al * al / denom * flux;
    }
    for (std::size_t i = 0; i < q.size(); ++i) grad[i] /= q[i];
    out.derivative = std::move(grad);
    return out;
  }

 private:
  GridPtr grid_;
  std::shared_ptr<const CovarianceModel> covariance_;
  ScalarField a0_;
  ScalarField f_;
  FunctionalSpec spec_;
  ScalarField u0_;
  ScalarField g0_;
  ScalarField exp_mu_;
  ScalarField gprime0_;
  double k_gprime0_ = 0.0;
};

inline double eval_G(const Problem& problem, const ScalarField& w) { return problem.value(w); }

inline ScalarField frechet_G(const Problem& problem, const ScalarField& w) {
  return problem.evaluate(w).derivative;
}

/// Pointwise form a_w (grad g_w . grad u_w) with second-order nodal gradients
/// (one-sided on boundary nodes). Agrees with frechet_G to O(h^2) on interior
/// nodes and to O(h) on the boundary, where the edge form sees half a cell.
/// exp_integral has no PDE and returns exp(w + mu).
inline ScalarField frechet_nodal(const Problem& problem, const ScalarField& w) {
  GEvaluation ev = problem.evaluate(w);
  if (problem.kind() == FunctionalKind::exp_integral) return ev.derivative;
  const Grid& grid = *problem.grid();
  const ScalarField a = problem.coefficient(w);
  auto gu = gradient(grid, ev.u_w);
  auto gg = gradient(grid, ev.g_w);
  ScalarField out(problem.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double dot = 0.0;
    for (int ax = 0; ax < grid.dim(); ++ax) dot += gu[ax][i] * gg[ax][i];
    out[i] = a[i] * dot;
  }
  return out;
}

}  // namespace ldtail
