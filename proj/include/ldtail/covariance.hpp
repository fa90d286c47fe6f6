#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "ldtail/error.hpp"
#include "ldtail/field.hpp"
#include "ldtail/grid.hpp"
#include "ldtail/random.hpp"

namespace ldtail {

enum class KernelKind { squared_exponential, exponential };

inline std::string to_string(KernelKind k) {
  return k == KernelKind::squared_exponential ? "squared_exponential" : "exponential";
}

inline KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "squared_exponential") return KernelKind::squared_exponential;
  if (s == "exponential") return KernelKind::exponential;
  throw InvalidArgument("unknown kernel kind '" + s + "'");
}

/// Stationary unit-variance kernel.
///
/// squared_exponential: exp(-r^2 / (2 l^2)). Sample paths are smooth, so both
/// HolderParams{k=0} and {k=1} (any beta) are meaningful.
/// exponential: exp(-r / l). Sample paths are only Hölder continuous with
/// exponent below 1/2; use k=0 and beta < 0.5.
struct CovarianceKernel {
  KernelKind kind = KernelKind::squared_exponential;
  double length_scale = 0.2;

  void validate() const {
    if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
      throw InvalidArgument("kernel: length_scale must be positive and finite");
    }
  }

  double operator()(const Point& x, const Point& y) const noexcept {
    const double dx = x[0] - y[0], dy = x[1] - y[1];
    if (kind == KernelKind::squared_exponential) {
      return std::exp(-(dx * dx + dy * dy) / (2.0 * length_scale * length_scale));
    }
    return std::exp(-std::hypot(dx, dy) / length_scale);
  }
};

/// Jitter values tried in order until the covariance matrix factorizes.
inline constexpr std::array<double, 5> kJitterLadder{0.0, 1e-12, 1e-10, 1e-8, 1e-6};

/// Dense covariance matrix of a kernel on a grid with a Cholesky factor of
/// (matrix + jitter I). The integral operator is discretized with the grid's
/// quadrature weights: (C w)_i = sum_j C_ij q_j w_j.
class CovarianceModel {
 public:
  CovarianceModel(GridPtr grid, CovarianceKernel kernel) : grid_(std::move(grid)), kernel_(kernel) {
    kernel_.validate();
    const auto n = static_cast<Eigen::Index>(grid_->size());
    matrix_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      matrix_(i, i) = 1.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        const double c = kernel_(grid_->node(i), grid_->node(j));
        matrix_(i, j) = c;
        matrix_(j, i) = c;
      }
    }
    weights_ = Eigen::Map<const Eigen::VectorXd>(grid_->weights().data(), n);

    const double norm = matrix_.norm();
    for (double jitter : kJitterLadder) {
      Eigen::MatrixXd shifted = matrix_;
      shifted.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(shifted);
      if (llt.info() != Eigen::Success) continue;
      Eigen::MatrixXd lower = llt.matrixL();
      if (!lower.allFinite() || (lower.diagonal().array() <= 0.0).any()) continue;
      const double err = (lower * lower.transpose() - shifted).norm();
      if (err > 1e-10 * norm) continue;
      factor_ = std::move(lower);
      jitter_ = jitter;
      return;
    }
    throw NumericalError("covariance: kernel " + to_string(kernel_.kind) + " with length scale " +
                         std::to_string(kernel_.length_scale) +
                         " is not positive definite on this grid even with jitter 1e-6");
  }

  const GridPtr& grid() const noexcept { return grid_; }
  const CovarianceKernel& kernel() const noexcept { return kernel_; }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  double jitter() const noexcept { return jitter_; }

  ScalarField apply(const ScalarField& w) const {
    check_on_grid(*grid_, w);
    Eigen::Map<const Eigen::VectorXd> wv(w.values().data(), static_cast<Eigen::Index>(w.size()));
    Eigen::VectorXd out = matrix_ * weights_.cwiseProduct(wv);
    return ScalarField(grid_, std::vector<double>(out.data(), out.data() + out.size()));
  }

  /// Writes factor * z into `out`, drawing z from `stream`. `z` is scratch.
  void sample_into(RandomStream& stream, Eigen::VectorXd& z, ScalarField& out) const {
    const auto n = static_cast<Eigen::Index>(grid_->size());
    z.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = stream.normal();
    Eigen::Map<Eigen::VectorXd> ov(out.values().data(), n);
    ov.noalias() = factor_.triangularView<Eigen::Lower>() * z;
  }

 private:
  GridPtr grid_;
  CovarianceKernel kernel_;
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd weights_;
  double jitter_ = 0.0;
};

inline CovarianceModel assemble(GridPtr grid, const CovarianceKernel& kernel) {
  return CovarianceModel(std::move(grid), kernel);
}

inline ScalarField apply_C(const CovarianceModel& model, const ScalarField& w) { return model.apply(w); }

/// K(w) = <w, C w>, clamped at zero when rounding leaves it slightly negative.
inline double k_energy(const CovarianceModel& model, const ScalarField& w) {
  const Grid& g = *model.grid();
  const double k = inner_product(g, w, model.apply(w));
  if (k < 0.0) {
    if (k < -1e-12 * std::max(1.0, inner_product(g, w, w))) throw NumericalError("covariance: quadratic form is negative (" + std::to_string(k) + ")");
    return 0.0;
  }
  return k;
}

inline ScalarField sample(const CovarianceModel& model, RandomStream& stream) {
  ScalarField out(model.grid());
  Eigen::VectorXd z;
  model.sample_into(stream, z, out);
  return out;
}

}  // namespace ldtail
