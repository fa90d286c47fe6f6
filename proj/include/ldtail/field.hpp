#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ldtail/error.hpp"
#include "ldtail/grid.hpp"

namespace ldtail {

/// Nodal values of a scalar function on a grid.
class ScalarField {
 public:
  ScalarField() = default;

  explicit ScalarField(GridPtr grid, double fill = 0.0)
      : grid_(std::move(grid)), values_(grid_ ? grid_->size() : 0, fill) {
    if (!grid_) throw InvalidArgument("field: null grid");
  }

  ScalarField(GridPtr grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw InvalidArgument("field: null grid");
    if (values_.size() != grid_->size()) {
      throw InvalidArgument("field: " + std::to_string(values_.size()) +
                            " values for a grid of " + std::to_string(grid_->size()) + " nodes");
    }
  }

  /// Tabulates `fn` at every node.
  static ScalarField from_function(GridPtr grid, const std::function<double(const Point&)>& fn) {
    ScalarField out(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) out.values_[i] = fn(grid->node(i));
    return out;
  }

  const GridPtr& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  double min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }

  template <class Fn>
  ScalarField map(Fn&& fn) const {
    ScalarField out(*this);
    for (auto& v : out.values_) v = fn(v);
    return out;
  }

  ScalarField& operator+=(const ScalarField& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  ScalarField& operator*=(double s) noexcept {
    for (auto& v : values_) v *= s;
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator*(ScalarField a, double s) { return a *= s; }

  /// Pointwise product.
  friend ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
    a.check_same(b);
    ScalarField out(a);
    for (std::size_t i = 0; i < out.values_.size(); ++i) out.values_[i] *= b.values_[i];
    return out;
  }

  void check_same(const ScalarField& o) const {
    if (!same_grid(grid_, o.grid_) || values_.size() != o.values_.size()) {
      throw InvalidArgument("field: operands live on different grids");
    }
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

inline void check_on_grid(const Grid& grid, const ScalarField& w) {
  if (w.size() != grid.size() || !w.grid() || !(*w.grid() == grid)) {
    throw InvalidArgument("field: size mismatch with grid (" + std::to_string(w.size()) +
                          " vs " + std::to_string(grid.size()) + " nodes)");
  }
}

/// Trapezoid quadrature: sum of weight_i * w_i.
inline double quadrature(const Grid& grid, const ScalarField& w) {
  check_on_grid(grid, w);
  auto q = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * w[i];
  return s;
}

inline double inner_product(const Grid& grid, const ScalarField& v, const ScalarField& w) {
  check_on_grid(grid, v);
  check_on_grid(grid, w);
  auto q = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q[i] * v[i] * w[i];
  return s;
}

/// Per-axis derivatives: central differences inside, one-sided second-order
/// differences on the first and last node of each grid line.
inline std::vector<ScalarField> gradient(const Grid& grid, const ScalarField& u) {
  check_on_grid(grid, u);
  std::vector<ScalarField> out;
  for (int a = 0; a < grid.dim(); ++a) {
    ScalarField d(u.grid());
    const std::size_t s = grid.stride(a);
    const std::size_t n = grid.n(a);
    const double inv2h = 0.5 / grid.h(a);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::size_t k = grid.multi_index(i)[a];
      if (k == 0) {
        d[i] = (-3.0 * u[i] + 4.0 * u[i + s] - u[i + 2 * s]) * inv2h;
      } else if (k + 1 == n) {
        d[i] = (3.0 * u[i] - 4.0 * u[i - s] + u[i - 2 * s]) * inv2h;
      } else {
        d[i] = (u[i + s] - u[i - s]) * inv2h;
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Derivative order and Hölder exponent of a C^{k,beta} norm.
struct HolderParams {
  int k = 0;
  double beta = 0.0;

  void validate() const {
    if (k != 0 && k != 1) throw InvalidArgument("holder: k must be 0 or 1");
    if (!(beta >= 0.0 && beta < 1.0)) throw InvalidArgument("holder: beta must lie in [0, 1)");
  }
};

/// Above this many nodes the Hölder seminorm scans node pairs (i, i + s) for
/// strides s = 1, 2, 4, ... instead of all pairs.
inline constexpr std::size_t kHolderFullPairLimit = 4096;

/// max over node pairs of |w(x) - w(y)| / |x - y|^beta.
inline double holder_seminorm(const Grid& grid, const ScalarField& w, double beta) {
  const std::size_t n = grid.size();
  double m = 0.0;
  auto visit = [&](std::size_t i, std::size_t j) {
    const double d = grid.distance(i, j);
    m = std::max(m, std::abs(w[i] - w[j]) / std::pow(d, beta));
  };
  if (n <= kHolderFullPairLimit) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
  } else {
    for (std::size_t s = 1; s < n; s *= 2)
      for (std::size_t i = 0; i + s < n; ++i) visit(i, i + s);
  }
  return m;
}

/// Discrete C^{k,beta} norm: sup norms of all derivatives up to order k plus,
/// for beta > 0, the beta-seminorm of the order-k derivatives. With beta = 0
/// this is the plain C^k norm.
inline double holder_norm(const Grid& grid, const ScalarField& w, const HolderParams& p) {
  check_on_grid(grid, w);
  p.validate();
  if (p.k == 0) {
    double norm = w.max_abs();
    if (p.beta > 0.0) norm += holder_seminorm(grid, w, p.beta);
    return norm;
  }
  auto grad = gradient(grid, w);
  double sup1 = 0.0;
  double semi = 0.0;
  for (const auto& g : grad) {
    sup1 = std::max(sup1, g.max_abs());
    if (p.beta > 0.0) semi = std::max(semi, holder_seminorm(grid, g, p.beta));
  }
  return w.max_abs() + sup1 + semi;
}

/// One row per node: coordinates then value, with a header line.
inline void write_csv(std::ostream& os, const ScalarField& w, const std::string& value_name = "value") {
  const Grid& g = *w.grid();
  os << (g.dim() == 1 ? "x0," : "x0,x1,") << value_name << '\n';
  char buf[96];
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto p = g.node(i);
    if (g.dim() == 1) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p[0], w[i]);
    } else {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p[0], p[1], w[i]);
    }
    os << buf;
  }
}

}  // namespace ldtail
