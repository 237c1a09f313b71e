#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "alignflow/errors.hpp"
#include "alignflow/field.hpp"
#include "alignflow/model.hpp"
#include "alignflow/spectral.hpp"

namespace alignflow {

/// λ must be 1/k for a positive integer k; returns k.
inline std::size_t scaling_period_factor(double lambda, std::size_t max_factor = 1u << 12) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be positive");
  const double inv = 1.0 / lambda;
  const double k = std::round(inv);
  if (k < 1.0 || std::abs(inv - k) > 1e-12 * k) {
    throw ParameterError("lambda must be the reciprocal of a positive integer, got " + std::to_string(lambda));
  }
  if (k > static_cast<double>(max_factor)) throw ParameterError("lambda too small for grid realization");
  return static_cast<std::size_t>(k);
}

namespace detail {

/// f(λx) on the period kL: the spectrum is unchanged, only the period grows,
/// so this is trigonometric interpolation relabelled onto the longer grid.
inline RealField stretch(const RealField& f, std::size_t k) {
  if (f.empty()) return f;
  const RealField fine = fourier_interpolate(f, k);
  const SpectralGrid g(f.size() * k, f.grid().length() * static_cast<double>(k));
  return RealField(g, std::vector<double>(fine.values().begin(), fine.values().end()));
}

}  // namespace detail

/// ρ_λ(x) = ρ(λx), G_λ = λ^α G(λx), u_λ = λ^{α−1} u(λx), on a grid with the
/// same point density over the period L/λ. The clock becomes t λ^{−α}.
inline SystemState scale_state(const SystemState& s, double lambda, double alpha) {
  const std::size_t k = scaling_period_factor(lambda);
  if (k == 1) return s;
  const double u_factor = std::pow(lambda, alpha - 1.0);
  SystemState out;
  out.formulation = s.formulation;
  out.rho = detail::stretch(s.rho, k);
  out.u = detail::stretch(s.u, k);
  if (!out.u.empty()) out.u *= u_factor;
  out.G = detail::stretch(s.G, k);
  if (!out.G.empty()) out.G *= std::pow(lambda, alpha);
  // the integrand carries λ^{α−1} and the period is k = 1/λ times longer
  out.momentum0 = s.momentum0 * u_factor / lambda;
  out.time = s.time * std::pow(lambda, -alpha);
  return out;
}

/// Model parameters for the rescaled problem: only the special model's mean
/// velocity carries a scaling.
inline ModelParams scale_params(const ModelParams& p, double lambda) {
  scaling_period_factor(lambda);
  ModelParams out = p;
  out.u_mean = p.u_mean * std::pow(lambda, p.alpha - 1.0);
  return out;
}

}  // namespace alignflow
