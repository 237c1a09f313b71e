#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "alignflow/errors.hpp"

namespace alignflow {

/// Uniform periodic grid on [0, L) with n nodes.
///
/// Mode indices m run over -n/2 .. n/2 and carry the wavenumber
/// k_m = 2πm/L. The grid is a small value type and is copied freely.
class SpectralGrid {
 public:
  static constexpr std::size_t kMinPoints = 8;

  explicit SpectralGrid(std::size_t n_points = 64, double length = 2.0 * std::numbers::pi)
      : n_(n_points), length_(length) {
    if (n_ < kMinPoints || n_ % 2 != 0) {
      throw ParameterError("grid size must be even and >= 8, got " + std::to_string(n_));
    }
    if (!(length_ > 0.0) || !std::isfinite(length_)) {
      throw ParameterError("grid length must be positive and finite");
    }
  }

  std::size_t size() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / static_cast<double>(n_); }
  double node(std::size_t j) const { return spacing() * static_cast<double>(j); }

  /// Number of stored half-spectrum coefficients (m = 0 .. n/2).
  std::size_t half_size() const { return n_ / 2 + 1; }
  int nyquist_mode() const { return static_cast<int>(n_ / 2); }
  double wavenumber(int m) const { return 2.0 * std::numbers::pi * m / length_; }

  /// Largest mode kept by the two-thirds rule. When 3 divides n the mode
  /// n/3 itself is dropped, otherwise products of retained modes alias
  /// back onto it.
  int dealias_cutoff() const { return static_cast<int>((n_ - 1) / 3); }

  /// Largest wavenumber of the dealiased band, 2π(n/3)/L.
  double max_retained_wavenumber() const {
    return 2.0 * std::numbers::pi * (static_cast<double>(n_) / 3.0) / length_;
  }

  friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) {
    return a.n_ == b.n_ && a.length_ == b.length_;
  }

 private:
  std::size_t n_;
  double length_;
};

}  // namespace alignflow
