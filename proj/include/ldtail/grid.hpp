#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ldtail/error.hpp"

namespace ldtail {

struct AxisBounds {
  double low = 0.0;
  double high = 1.0;
  bool operator==(const AxisBounds&) const = default;
};

using Point = std::array<double, 2>;

/// Tensor-product grid on a box in one or two dimensions.
///
/// Nodes are ordered lexicographically with axis 0 fastest, so node
/// (i0, i1) has linear index i0 + n0 * i1. Quadrature weights are the
/// tensor-product trapezoid weights and sum to the box measure. This ordering
/// is part of the CSV field format and must not change.
class Grid {
 public:
  Grid(std::vector<AxisBounds> bounds, std::vector<std::size_t> n)
      : bounds_(std::move(bounds)), n_(std::move(n)) {
    if (bounds_.empty() || bounds_.size() > 2 || bounds_.size() != n_.size()) {
      throw InvalidArgument("grid: dimension must be 1 or 2 with one node count per axis");
    }
    for (std::size_t a = 0; a < n_.size(); ++a) {
      if (n_[a] < 3) {
        throw InvalidArgument("grid: axis " + std::to_string(a) + " needs at least 3 nodes");
      }
      if (!(bounds_[a].low < bounds_[a].high) || !std::isfinite(bounds_[a].low) ||
          !std::isfinite(bounds_[a].high)) {
        throw InvalidArgument("grid: axis " + std::to_string(a) + " has degenerate bounds");
      }
      h_[a] = (bounds_[a].high - bounds_[a].low) / static_cast<double>(n_[a] - 1);
    }
    size_ = 1;
    for (auto k : n_) size_ *= k;

    std::array<std::vector<double>, 2> axis_w;
    for (std::size_t a = 0; a < n_.size(); ++a) {
      axis_w[a].assign(n_[a], h_[a]);
      axis_w[a].front() = axis_w[a].back() = 0.5 * h_[a];
    }
    weights_.resize(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      auto idx = multi_index(i);
      double w = axis_w[0][idx[0]];
      if (dim() == 2) w *= axis_w[1][idx[1]];
      weights_[i] = w;
    }
  }

  int dim() const noexcept { return static_cast<int>(n_.size()); }
  std::size_t size() const noexcept { return size_; }
  std::size_t n(int axis) const { return n_.at(axis); }
  double h(int axis) const { return h_.at(axis); }
  const AxisBounds& bounds(int axis) const { return bounds_.at(axis); }
  const std::vector<AxisBounds>& bounds() const noexcept { return bounds_; }
  const std::vector<std::size_t>& counts() const noexcept { return n_; }

  /// Linear-index offset between neighbours along `axis`.
  std::size_t stride(int axis) const { return axis == 0 ? 1 : n_[0]; }

  std::array<std::size_t, 2> multi_index(std::size_t i) const noexcept {
    if (dim() == 1) return {i, 0};
    return {i % n_[0], i / n_[0]};
  }

  std::size_t linear_index(std::size_t i0, std::size_t i1 = 0) const noexcept {
    return i0 + n_[0] * i1;
  }

  Point node(std::size_t i) const noexcept {
    auto idx = multi_index(i);
    Point p{bounds_[0].low + h_[0] * static_cast<double>(idx[0]), 0.0};
    if (dim() == 2) p[1] = bounds_[1].low + h_[1] * static_cast<double>(idx[1]);
    return p;
  }

  bool is_boundary(std::size_t i) const noexcept {
    auto idx = multi_index(i);
    for (int a = 0; a < dim(); ++a) {
      if (idx[a] == 0 || idx[a] + 1 == n_[a]) return true;
    }
    return false;
  }

  std::span<const double> weights() const noexcept { return weights_; }

  double measure() const noexcept {
    double m = 1.0;
    for (const auto& b : bounds_) m *= b.high - b.low;
    return m;
  }

  double distance(std::size_t i, std::size_t j) const noexcept {
    auto p = node(i), q = node(j);
    return std::hypot(p[0] - q[0], p[1] - q[1]);
  }

  bool operator==(const Grid& o) const noexcept {
    return bounds_ == o.bounds_ && n_ == o.n_;
  }

 private:
  std::vector<AxisBounds> bounds_;
  std::vector<std::size_t> n_;
  std::array<double, 2> h_{0.0, 0.0};
  std::size_t size_ = 0;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_grid(std::vector<AxisBounds> bounds, std::vector<std::size_t> n) {
  return std::make_shared<const Grid>(std::move(bounds), std::move(n));
}

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
  return a && b && (a == b || *a == *b);
}

}  // namespace ldtail
