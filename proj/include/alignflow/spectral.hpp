#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "alignflow/detail/fftw_plans.hpp"
#include "alignflow/errors.hpp"
#include "alignflow/field.hpp"
#include "alignflow/grid.hpp"

namespace alignflow {

/// Discrete Fourier coefficients of f, scaled so mode 0 is the mean.
inline SpectralField forward_transform(const RealField& f) {
  f.validate("forward_transform input");
  const auto& grid = f.grid();
  std::vector<double> in(f.values().begin(), f.values().end());
  std::vector<std::complex<double>> out;
  detail::fft_r2c(in, out);
  SpectralField spec(grid);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (std::size_t m = 0; m < out.size(); ++m) spec[m] = out[m] * scale;
  return spec;
}

inline RealField inverse_transform(const SpectralField& spec, double symmetry_tol = 1e-12) {
  spec.check_symmetry(symmetry_tol);
  const auto& grid = spec.grid();
  std::vector<std::complex<double>> in(spec.coefficients().begin(), spec.coefficients().end());
  in.front().imag(0.0);
  in.back().imag(0.0);
  std::vector<double> out(grid.size());
  detail::fft_c2r(in, out);
  return RealField(grid, std::move(out));
}

/// Multiplies mode m (m >= 0) by symbol(m, k_m) and transforms back.
/// The symbol of a real operator at -m is the conjugate of that at m, so
/// the half spectrum is enough.
template <typename Symbol>
RealField apply_multiplier(const RealField& f, Symbol&& symbol) {
  SpectralField spec = forward_transform(f);
  const auto& grid = f.grid();
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const int mi = static_cast<int>(m);
    spec[m] *= symbol(mi, grid.wavenumber(mi));
  }
  return inverse_transform(spec);
}

/// Spectral ∂_x. The Nyquist mode is dropped.
inline RealField derivative(const RealField& f) {
  const int nyq = f.grid().nyquist_mode();
  return apply_multiplier(f, [nyq](int m, double k) -> std::complex<double> {
    if (m == nyq) return 0.0;
    return {0.0, k};
  });
}

inline void check_fractional_order(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw ParameterError("fractional order must lie in (0, 2)");
  }
}

/// Λ^α with Fourier symbol |k|^α; annihilates constants.
inline RealField fractional_laplacian(const RealField& f, double alpha) {
  check_fractional_order(alpha);
  return apply_multiplier(f, [alpha](int m, double k) -> std::complex<double> {
    if (m == 0) return 0.0;
    return std::pow(std::abs(k), alpha);
  });
}

/// Λ^α ∂_x^{-1}: the map θ ↦ Λ^α φ with φ the mean-zero primitive of θ.
/// Mode 0 of the input is ignored.
inline RealField fractional_laplacian_of_primitive(const RealField& f, double alpha) {
  check_fractional_order(alpha);
  const int nyq = f.grid().nyquist_mode();
  return apply_multiplier(f, [alpha, nyq](int m, double k) -> std::complex<double> {
    if (m == 0 || m == nyq) return 0.0;
    return std::complex<double>(0.0, -std::pow(std::abs(k), alpha) / k);
  });
}

/// Mean-zero P with ∂_x P = f. The input must have zero mean to within
/// 1e-10 max|f|.
inline RealField mean_zero_primitive(const RealField& f, double tol = 1e-10) {
  f.validate("mean_zero_primitive input");
  const double mean = f.mean();
  if (std::abs(mean) > tol * f.max_abs() && std::abs(mean) > 0.0) {
    throw MeanViolationError("primitive requested for a field with mean " + std::to_string(mean));
  }
  const int nyq = f.grid().nyquist_mode();
  return apply_multiplier(f, [nyq](int m, double k) -> std::complex<double> {
    if (m == 0 || m == nyq) return 0.0;
    return std::complex<double>(0.0, -1.0 / k);
  });
}

/// Two-thirds rule: zero every mode above the grid's dealias cutoff.
inline SpectralField dealias(SpectralField spec) {
  const auto cutoff = static_cast<std::size_t>(spec.grid().dealias_cutoff());
  for (std::size_t m = cutoff + 1; m < spec.size(); ++m) spec[m] = 0.0;
  return spec;
}

inline RealField dealias(const RealField& f) { return inverse_transform(dealias(forward_transform(f))); }

/// Pointwise product projected onto the dealiased band.
inline RealField dealiased_product(const RealField& a, const RealField& b) {
  return dealias(pointwise_product(a, b));
}

/// Fraction of fluctuation energy held by the top third of the retained
/// band, i.e. modes in (2/3 · cutoff, cutoff]. Returns 0 for constants.
/// The denominator carries a floor of (1e-12 · mean)² so that a field whose
/// fluctuations are round-off about its mean reads as flat, not as noise.
inline double spectral_tail_fraction(const SpectralField& spec) {
  const int cutoff = spec.grid().dealias_cutoff();
  const int tail_start = (2 * cutoff) / 3;
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t m = 1; m < spec.size(); ++m) {
    const double w = (m == spec.size() - 1) ? 1.0 : 2.0;
    const double e = w * std::norm(spec[m]);
    total += e;
    if (static_cast<int>(m) > tail_start) tail += e;
  }
  const double floor = std::norm(1e-12 * spec[0]);
  return total + floor > 0.0 ? tail / (total + floor) : 0.0;
}

inline double spectral_tail_fraction(const RealField& f) {
  return spectral_tail_fraction(forward_transform(f));
}

/// Band-limited (trigonometric) interpolation onto a grid with
/// factor * n points over the same period.
inline RealField fourier_interpolate(const RealField& f, std::size_t factor) {
  if (factor < 1) throw ParameterError("interpolation factor must be >= 1");
  if (factor == 1) return f;
  const SpectralField spec = forward_transform(f);
  const SpectralGrid fine(f.size() * factor, f.grid().length());
  SpectralField padded(fine);
  const std::size_t nyq = spec.size() - 1;
  for (std::size_t m = 0; m < nyq; ++m) padded[m] = spec[m];
  // The coarse Nyquist coefficient is cos((n/2) x) and splits evenly
  // between ±n/2 on the fine grid.
  padded[nyq] = 0.5 * spec[nyq].real();
  return inverse_transform(padded);
}

/// Evaluates the trigonometric interpolant of a spectrum at arbitrary x.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(const SpectralField& spec) : spec_(spec) {}
  explicit TrigInterpolant(const RealField& f) : spec_(forward_transform(f)) {}

  double operator()(double x) const {
    const auto& grid = spec_.grid();
    const double theta = 2.0 * std::numbers::pi * x / grid.length();
    const std::complex<double> step(std::cos(theta), std::sin(theta));
    std::complex<double> z = step;
    double sum = spec_[0].real();
    const std::size_t nyq = spec_.size() - 1;
    for (std::size_t m = 1; m < nyq; ++m) {
      sum += 2.0 * (spec_[m] * z).real();
      z *= step;
    }
    // Nyquist contributes c cos(n x / 2 · 2π/L)
    sum += spec_[nyq].real() * z.real();
    return sum;
  }

  /// d/dx of the interpolant at x.
  double derivative(double x) const {
    const auto& grid = spec_.grid();
    const double theta = 2.0 * std::numbers::pi * x / grid.length();
    const std::complex<double> step(std::cos(theta), std::sin(theta));
    std::complex<double> z = step;
    double sum = 0.0;
    const std::size_t nyq = spec_.size() - 1;
    for (std::size_t m = 1; m < nyq; ++m) {
      const double k = grid.wavenumber(static_cast<int>(m));
      sum += 2.0 * (std::complex<double>(0.0, k) * spec_[m] * z).real();
      z *= step;
    }
    return sum;
  }

  const SpectralField& spectrum() const { return spec_; }

 private:
  SpectralField spec_;
};

}  // namespace alignflow
