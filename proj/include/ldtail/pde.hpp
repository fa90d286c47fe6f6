#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ldtail/banded_cholesky.hpp"
#include "ldtail/error.hpp"
#include "ldtail/field.hpp"
#include "ldtail/grid.hpp"

namespace ldtail {

/// Finite-difference discretization of -div(a grad u) with u = 0 on the
/// boundary of a box.
///
/// Each grid edge carries the harmonic mean of the nodal coefficients at its
/// endpoints. Only edges touching an interior node enter the stencil; the
/// boundary rows and columns are eliminated. The right-hand side is used in
/// strong form (no mass-matrix weighting).
class EllipticOperator {
 public:
  struct Edge {
    std::size_t lo;  // node index, lo < hi
    std::size_t hi;
    int axis;
    double coefficient;  // harmonic mean of a at lo and hi
  };

  EllipticOperator(GridPtr grid, ScalarField a)
      : grid_(std::move(grid)), a_(std::move(a)), system_(0, 0) {
    check_on_grid(*grid_, a_);
    for (std::size_t i = 0; i < grid_->size(); ++i) {
      if (!(a_[i] > 0.0) || !std::isfinite(a_[i])) {
        auto p = grid_->node(i);
        throw InvalidArgument("pde: coefficient must be positive, got " + std::to_string(a_[i]) +
                              " at node " + std::to_string(i) + " (x0=" + std::to_string(p[0]) +
                              (grid_->dim() == 2 ? ", x1=" + std::to_string(p[1]) : std::string()) +
                              ")");
      }
    }

    const Grid& g = *grid_;
    unknown_.assign(g.size(), kNone);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.is_boundary(i)) {
        unknown_[i] = interior_.size();
        interior_.push_back(i);
      }
    }

    for (int ax = 0; ax < g.dim(); ++ax) {
      const std::size_t s = g.stride(ax);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.multi_index(i)[ax] + 1 == g.n(ax)) continue;
        const std::size_t j = i + s;
        if (unknown_[i] == kNone && unknown_[j] == kNone) continue;
        const double c = 2.0 * a_[i] * a_[j] / (a_[i] + a_[j]);
        edges_.push_back({i, j, ax, c});
      }
    }

    const std::size_t bw = g.dim() == 1 ? 1 : g.n(0) - 2;
    system_ = BandedSpdMatrix(interior_.size(), bw);
    for (const auto& e : edges_) {
      const double v = e.coefficient / (g.h(e.axis) * g.h(e.axis));
      const std::size_t ri = unknown_[e.lo], rj = unknown_[e.hi];
      if (ri != kNone) system_.add(ri, ri, v);
      if (rj != kNone) system_.add(rj, rj, v);
      if (ri != kNone && rj != kNone) system_.add(ri, rj, -v);
    }
    factor_.emplace(system_);
  }

  const GridPtr& grid() const noexcept { return grid_; }
  const ScalarField& coefficient() const noexcept { return a_; }
  const BandedSpdMatrix& system() const noexcept { return system_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& interior_nodes() const noexcept { return interior_; }

  /// Solution with zero boundary values; boundary entries of rhs are ignored.
  ScalarField solve(const ScalarField& rhs) const {
    check_on_grid(*grid_, rhs);
    std::vector<double> b(interior_.size());
    for (std::size_t r = 0; r < interior_.size(); ++r) b[r] = rhs[interior_[r]];
    factor_->solve_in_place(b);
    ScalarField u(grid_);
    for (std::size_t r = 0; r < interior_.size(); ++r) u[interior_[r]] = b[r];
    return u;
  }

  /// Stencil applied to u at interior nodes; zero on the boundary.
  ScalarField apply(const ScalarField& u) const {
    check_on_grid(*grid_, u);
    std::vector<double> x(interior_.size()), y(interior_.size());
    for (std::size_t r = 0; r < interior_.size(); ++r) x[r] = u[interior_[r]];
    system_.multiply(x, y);
    ScalarField out(grid_);
    for (std::size_t r = 0; r < interior_.size(); ++r) out[interior_[r]] = y[r];
    return out;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  GridPtr grid_;
  ScalarField a_;
  std::vector<std::size_t> unknown_;
  std::vector<std::size_t> interior_;
  std::vector<Edge> edges_;
  BandedSpdMatrix system_;
  std::optional<BandedCholesky> factor_;
};

inline EllipticOperator build_operator(GridPtr grid, ScalarField a) {
  return EllipticOperator(std::move(grid), std::move(a));
}

inline ScalarField solve(const EllipticOperator& op, const ScalarField& rhs) { return op.solve(rhs); }

}  // namespace ldtail
