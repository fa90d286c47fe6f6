#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ldtail/error.hpp"

namespace ldtail {

/// Symmetric positive-definite band matrix stored by lower diagonals:
/// entry (i, j) with 0 <= i - j <= bandwidth lives at band[(i - j) + (bw + 1) * j].
class BandedSpdMatrix {
 public:
  BandedSpdMatrix(std::size_t n, std::size_t bandwidth)
      : n_(n), bw_(std::min(bandwidth, n ? n - 1 : 0)), band_((bw_ + 1) * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return bw_; }

  /// Entry (i, j) of the full matrix; zero outside the band.
  double operator()(std::size_t i, std::size_t j) const noexcept {
    if (i < j) std::swap(i, j);
    if (i - j > bw_) return 0.0;
    return band_[(i - j) + (bw_ + 1) * j];
  }

  /// Adds v to (i, j) and, implicitly, (j, i).
  void add(std::size_t i, std::size_t j, double v) {
    if (i < j) std::swap(i, j);
    if (i - j > bw_) throw InvalidArgument("banded: entry outside bandwidth");
    band_[(i - j) + (bw_ + 1) * j] += v;
  }

  void multiply(std::span<const double> x, std::span<double> y) const noexcept {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      y[j] += band_[(bw_ + 1) * j] * x[j];
      const std::size_t last = std::min(n_ - 1, j + bw_);
      for (std::size_t i = j + 1; i <= last; ++i) {
        const double a = band_[(i - j) + (bw_ + 1) * j];
        y[i] += a * x[j];
        y[j] += a * x[i];
      }
    }
  }

  bool operator==(const BandedSpdMatrix&) const = default;

 private:
  friend class BandedCholesky;
  std::size_t n_;
  std::size_t bw_;
  std::vector<double> band_;
};

/// L L^T factorization of a BandedSpdMatrix, O(n bw^2) to build and O(n bw)
/// per solve. Solves are const and may run concurrently.
class BandedCholesky {
 public:
  explicit BandedCholesky(const BandedSpdMatrix& a) : n_(a.n_), bw_(a.bw_), l_(a.band_) {
    const std::size_t ld = bw_ + 1;
    for (std::size_t j = 0; j < n_; ++j) {
      double d = l_[ld * j];
      const std::size_t k0 = j > bw_ ? j - bw_ : 0;
      for (std::size_t k = k0; k < j; ++k) {
        const double ljk = l_[(j - k) + ld * k];
        d -= ljk * ljk;
      }
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw NumericalError("banded cholesky: non-positive pivot at row " + std::to_string(j));
      }
      const double ljj = std::sqrt(d);
      l_[ld * j] = ljj;
      const std::size_t last = std::min(n_ - 1, j + bw_);
      for (std::size_t i = j + 1; i <= last; ++i) {
        double s = l_[(i - j) + ld * j];
        const std::size_t kk0 = i > bw_ ? i - bw_ : 0;
        for (std::size_t k = std::max(k0, kk0); k < j; ++k) {
          s -= l_[(i - k) + ld * k] * l_[(j - k) + ld * k];
        }
        l_[(i - j) + ld * j] = s / ljj;
      }
    }
  }

  /// Overwrites b with A^{-1} b.
  void solve_in_place(std::span<double> b) const noexcept {
    const std::size_t ld = bw_ + 1;
    for (std::size_t j = 0; j < n_; ++j) {
      b[j] /= l_[ld * j];
      const std::size_t last = std::min(n_ - 1, j + bw_);
      for (std::size_t i = j + 1; i <= last; ++i) b[i] -= l_[(i - j) + ld * j] * b[j];
    }
    for (std::size_t jj = n_; jj-- > 0;) {
      double s = b[jj];
      const std::size_t last = std::min(n_ - 1, jj + bw_);
      for (std::size_t i = jj + 1; i <= last; ++i) s -= l_[(i - jj) + ld * jj] * b[i];
      b[jj] = s / l_[ld * jj];
    }
  }

 private:
  std::size_t n_;
  std::size_t bw_;
  std::vector<double> l_;
};

}  // namespace ldtail
