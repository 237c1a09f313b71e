#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "alignflow/errors.hpp"
#include "alignflow/grid.hpp"

namespace alignflow {

/// Real grid function attached to a SpectralGrid.
///
/// A default-constructed field is empty and stands for "absent" in model
/// states (e.g. the density of a Burgers state).
class RealField {
 public:
  RealField() = default;

  explicit RealField(const SpectralGrid& grid, double value = 0.0)
      : grid_(grid), values_(grid.size(), value) {}

  RealField(const SpectralGrid& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw InvalidFieldError("field has " + std::to_string(values_.size()) +
                              " values for a grid of " + std::to_string(grid_.size()));
    }
  }

  /// Samples f at the grid nodes.
  template <typename Fn>
  static RealField sample(const SpectralGrid& grid, Fn&& f) {
    RealField out(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) out.values_[j] = f(grid.node(j));
    return out;
  }

  bool empty() const { return values_.empty(); }
  const SpectralGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t j) { return values_[j]; }
  double operator[](std::size_t j) const { return values_[j]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  /// Throws InvalidFieldError on empty or non-finite fields.
  void validate(const char* what = "field") const {
    if (empty()) throw InvalidFieldError(std::string(what) + " is empty");
    if (!all_finite()) throw InvalidFieldError(std::string(what) + " has non-finite values");
  }

  double mean() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  RealField& operator+=(const RealField& o) {
    check_same_grid(o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
    return *this;
  }
  RealField& operator-=(const RealField& o) {
    check_same_grid(o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
    return *this;
  }
  RealField& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }
  RealField& operator+=(double c) {
    for (double& v : values_) v += c;
    return *this;
  }

  /// this += a * x
  RealField& axpy(double a, const RealField& x) {
    check_same_grid(x);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += a * x.values_[j];
    return *this;
  }

  void check_same_grid(const RealField& o) const {
    if (!(grid_ == o.grid_) || values_.size() != o.values_.size()) {
      throw GridMismatchError("fields live on different grids");
    }
  }

 private:
  SpectralGrid grid_;
  std::vector<double> values_;
};

inline RealField operator+(RealField a, const RealField& b) { return a += b; }
inline RealField operator-(RealField a, const RealField& b) { return a -= b; }
inline RealField operator*(double s, RealField a) { return a *= s; }

/// Pointwise product without dealiasing.
inline RealField pointwise_product(const RealField& a, const RealField& b) {
  a.check_same_grid(b);
  RealField out(a.grid());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

/// Fourier coefficients of a real field, stored as the half spectrum
/// m = 0 .. n/2. Coefficients at negative m are the conjugates, so the
/// Hermitian symmetry holds by construction apart from the two
/// self-conjugate modes 0 and n/2, which must be real.
class SpectralField {
 public:
  using complex = std::complex<double>;

  SpectralField() = default;
  explicit SpectralField(const SpectralGrid& grid) : grid_(grid), coeffs_(grid.half_size()) {}

  /// Builds a spectrum from all n coefficients in FFT order (index j holds
  /// mode j for j <= n/2 and mode j - n above). Rejects input that is not
  /// conjugate-symmetric to within tol relative to the largest coefficient.
  static SpectralField from_full(const SpectralGrid& grid, std::span<const complex> full,
                                 double tol = 1e-12) {
    const std::size_t n = grid.size();
    if (full.size() != n) throw InvalidFieldError("full spectrum has the wrong length");
    double scale = 0.0;
    for (const auto& c : full) scale = std::max(scale, std::abs(c));
    const double limit = tol * std::max(scale, 1e-300);
    for (std::size_t j = 1; j < n; ++j) {
      if (std::abs(full[j] - std::conj(full[n - j])) > limit) {
        throw AsymmetryError("coefficients violate Hermitian symmetry at mode " +
                             std::to_string(j <= n / 2 ? static_cast<long>(j)
                                                       : static_cast<long>(j) - static_cast<long>(n)));
      }
    }
    SpectralField out(grid);
    for (std::size_t m = 0; m < out.coeffs_.size(); ++m) out.coeffs_[m] = full[m];
    out.check_symmetry(tol);
    return out;
  }

  const SpectralGrid& grid() const { return grid_; }
  std::size_t size() const { return coeffs_.size(); }

  complex& operator[](std::size_t m) { return coeffs_[m]; }
  const complex& operator[](std::size_t m) const { return coeffs_[m]; }
  std::span<complex> coefficients() { return coeffs_; }
  std::span<const complex> coefficients() const { return coeffs_; }

  /// Coefficient for any mode in [-n/2, n/2].
  complex mode(int m) const {
    const int nyq = grid_.nyquist_mode();
    if (m < -nyq || m > nyq) throw ParameterError("mode index out of range");
    return m >= 0 ? coeffs_[static_cast<std::size_t>(m)]
                  : std::conj(coeffs_[static_cast<std::size_t>(-m)]);
  }

  /// Throws AsymmetryError if modes 0 or n/2 carry an imaginary part.
  void check_symmetry(double tol = 1e-12) const {
    double scale = 0.0;
    for (const auto& c : coeffs_) scale = std::max(scale, std::abs(c));
    const double limit = tol * std::max(scale, 1e-300);
    if (std::abs(coeffs_.front().imag()) > limit || std::abs(coeffs_.back().imag()) > limit) {
      throw AsymmetryError("self-conjugate modes must be real");
    }
  }

  /// Sum of |c_m|^2 over all modes m != 0 (both signs).
  double fluctuation_energy() const {
    double e = 0.0;
    for (std::size_t m = 1; m < coeffs_.size(); ++m) {
      const double w = (m == coeffs_.size() - 1) ? 1.0 : 2.0;
      e += w * std::norm(coeffs_[m]);
    }
    return e;
  }

  /// Sum of |c_m|^2 over all modes including the mean.
  double energy() const { return std::norm(coeffs_.front()) + fluctuation_energy(); }

 private:
  SpectralGrid grid_;
  std::vector<complex> coeffs_;
};

}  // namespace alignflow
