#pragma once

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "alignflow/errors.hpp"
#include "alignflow/field.hpp"
#include "alignflow/model.hpp"
#include "alignflow/spectral.hpp"

namespace alignflow {

/// Continuum sup/inf are taken on the 4× Fourier-interpolated grid and
/// then polished by a bracketed 1D minimization.
inline constexpr std::size_t kInterpolationFactor = 4;

struct Extremum {
  double x = 0.0;
  double value = 0.0;
};

/// Refines the maximum of fn near x0 inside [x0 - h, x0 + h].
template <typename Fn>
Extremum refine_maximum(Fn&& fn, double x0, double h, double start_value) {
  auto neg = [&](double x) { return -fn(x); };
  std::uintmax_t iters = 100;
  const auto [x, v] = boost::math::tools::brent_find_minima(neg, x0 - h, x0 + h, 40, iters);
  if (-v >= start_value) return {x, -v};
  return {x0, start_value};
}

/// Maximum of a function given its samples on a uniform periodic grid.
template <typename Fn>
Extremum locate_maximum(Fn&& fn, const RealField& fine_samples) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < fine_samples.size(); ++j) {
    if (fine_samples[j] > fine_samples[best]) best = j;
  }
  const auto& g = fine_samples.grid();
  return refine_maximum(fn, g.node(best), g.spacing(), fine_samples[best]);
}

inline Extremum field_maximum(const RealField& f) {
  const TrigInterpolant interp(f);
  return locate_maximum(interp, fourier_interpolate(f, kInterpolationFactor));
}

inline Extremum field_minimum(const RealField& f) {
  const TrigInterpolant interp(f);
  RealField fine = fourier_interpolate(f, kInterpolationFactor);
  fine *= -1.0;
  auto e = locate_maximum([&](double x) { return -interp(x); }, fine);
  return {e.x, -e.value};
}

/// sup |f| over the continuum.
inline double sup_norm(const RealField& f) {
  return std::max(std::abs(field_maximum(f).value), std::abs(field_minimum(f).value));
}

/// sup |∂_x f| estimated on the interpolated grid (no refinement).
inline double gradient_sup_on_fine_grid(const RealField& f) {
  return fourier_interpolate(derivative(f), kInterpolationFactor).max_abs();
}

/// ∫ρ dx, exact for band-limited fields on a uniform grid.
inline double mass(const RealField& rho) { return grid_integral(rho); }

/// ∫ρu dx.
inline double momentum(const RealField& rho, const RealField& u) {
  return grid_integral(pointwise_product(rho, u));
}

/// sup u − inf u.
inline double flocking_amplitude(const RealField& u) {
  return field_maximum(u).value - field_minimum(u).value;
}

inline double l2_norm(const RealField& f) { return std::sqrt(grid_integral(pointwise_product(f, f))); }

/// Extremes of F = G/ρ and sup |∂_x F|, located on the continuum from
/// the interpolants of G and ρ.
struct TransportedRatio {
  double F_min = 0.0;
  double F_max = 0.0;
  double max_dx_F = 0.0;
  /// sup |∂_x F / ρ|, the weight w of the Lipschitz argument.
  double w_sup = 0.0;
};

inline TransportedRatio transported_ratio(const RealField& rho, const RealField& G) {
  check_no_vacuum(rho);
  const TrigInterpolant r(rho);
  const TrigInterpolant g(G);
  auto F = [&](double x) { return g(x) / r(x); };
  auto dF = [&](double x) {
    const double rv = r(x);
    return (g.derivative(x) * rv - g(x) * r.derivative(x)) / (rv * rv);
  };

  const RealField rho_f = fourier_interpolate(rho, kInterpolationFactor);
  const RealField G_f = fourier_interpolate(G, kInterpolationFactor);
  const RealField drho_f = fourier_interpolate(derivative(rho), kInterpolationFactor);
  const RealField dG_f = fourier_interpolate(derivative(G), kInterpolationFactor);
  RealField F_f(rho_f.grid()), negF_f(rho_f.grid()), absdF_f(rho_f.grid()), w_f(rho_f.grid());
  for (std::size_t j = 0; j < F_f.size(); ++j) {
    F_f[j] = G_f[j] / rho_f[j];
    negF_f[j] = -F_f[j];
    const double d = (dG_f[j] * rho_f[j] - G_f[j] * drho_f[j]) / (rho_f[j] * rho_f[j]);
    absdF_f[j] = std::abs(d);
    w_f[j] = std::abs(d / rho_f[j]);
  }
  TransportedRatio out;
  out.F_max = locate_maximum(F, F_f).value;
  out.F_min = -locate_maximum([&](double x) { return -F(x); }, negF_f).value;
  out.max_dx_F = locate_maximum([&](double x) { return std::abs(dF(x)); }, absdF_f).value;
  out.w_sup = locate_maximum([&](double x) { return std::abs(dF(x) / r(x)); }, w_f).value;
  return out;
}

/// One row of the trajectory time series. Columns that do not apply to
/// a formulation (density columns for Burgers) hold NaN.
struct TrajectoryRecord {
  double time = 0.0;
  double mass = 0.0;
  double momentum = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double F_min = 0.0;
  double F_max = 0.0;
  double max_dx_F = 0.0;
  double flocking_amplitude = 0.0;
  double bkm_partial = 0.0;
  double u_l2_norm = 0.0;
};

inline TrajectoryRecord make_record(const SystemState& s, const ModelParams& p, double bkm_partial) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  TrajectoryRecord rec;
  rec.time = s.time;
  rec.bkm_partial = bkm_partial;
  const RealField u = velocity(s, p);
  rec.flocking_amplitude = flocking_amplitude(u);
  rec.u_l2_norm = l2_norm(u);
  if (s.formulation == Formulation::burgers) {
    rec.mass = nan;
    rec.momentum = grid_integral(u);
    rec.rho_min = rec.rho_max = rec.F_min = rec.F_max = rec.max_dx_F = nan;
    return rec;
  }
  rec.mass = mass(s.rho);
  rec.momentum = momentum(s.rho, u);
  rec.rho_min = field_minimum(s.rho).value;
  rec.rho_max = field_maximum(s.rho).value;
  const RealField G = constraint_field(s, p);
  if (s.formulation == Formulation::special) {
    rec.F_min = rec.F_max = rec.max_dx_F = 0.0;
  } else {
    const auto tr = transported_ratio(s.rho, G);
    rec.F_min = tr.F_min;
    rec.F_max = tr.F_max;
    rec.max_dx_F = tr.max_dx_F;
  }
  return rec;
}

/// Outcome of the a priori bound checks on a recorded trajectory.
struct BoundsReport {
  bool upper_bound_ok = true;
  double sup_rho_max = 0.0;
  double time_of_sup = 0.0;

  bool lower_bound_ok = true;
  /// min over records of rho_min(t) − (1 − tol)/(1/rho_min0 + t‖F₀‖).
  double lower_bound_margin = std::numeric_limits<double>::infinity();

  bool f_transport_ok = true;
  double f_extrema_drift = 0.0;

  bool f_lipschitz_ok = true;
  /// max over t of max|∂_x F| / (‖w₀‖ · rho_max(t)).
  double f_lipschitz_ratio = 0.0;
};

/// Vacuum lower bound ρ_m(t) ≥ 1/(1/ρ_m(0) + t‖F₀‖_∞) with relative slack
/// `tol`, plus the no-late-growth form of the upper bound: the largest
/// rho_max in the final tenth of the records may not exceed the earlier
/// maximum.
inline BoundsReport check_density_bounds(std::span<const TrajectoryRecord> records, double F0_sup,
                                         double rho_min0, double tol = 1e-3) {
  if (records.empty()) throw ParameterError("no trajectory records");
  BoundsReport rep;
  rep.sup_rho_max = records.front().rho_max;
  rep.time_of_sup = records.front().time;
  for (const auto& r : records) {
    const double bound = (1.0 - tol) / (1.0 / rho_min0 + r.time * F0_sup);
    rep.lower_bound_margin = std::min(rep.lower_bound_margin, r.rho_min - bound);
    // first time the running maximum is reached, ignoring round-off ties
    if (r.rho_max > rep.sup_rho_max * (1.0 + 1e-12)) {
      rep.sup_rho_max = r.rho_max;
      rep.time_of_sup = r.time;
    }
  }
  rep.lower_bound_ok = rep.lower_bound_margin >= 0.0;

  const std::size_t tail_start = records.size() - std::max<std::size_t>(1, records.size() / 10);
  double early = 0.0;
  double late = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    double& bucket = i < tail_start ? early : late;
    bucket = std::max(bucket, records[i].rho_max);
  }
  rep.upper_bound_ok = records.size() < 2 || late <= early * (1.0 + 1e-12);
  return rep;
}

/// F is transported, so its extremes are constants of motion; and
/// |∂_x F| ≤ ‖w₀‖_∞ ρ_max(t) with w = ∂_x F / ρ.
/// `abs_floor` absorbs round-off when F itself is round-off (G₀ ≡ 0).
inline BoundsReport check_F_transport(std::span<const TrajectoryRecord> records, double w0_sup,
                                      double drift_tol = 1e-6, double lipschitz_slack = 1e-3,
                                      double abs_floor = 1e-10) {
  if (records.empty()) throw ParameterError("no trajectory records");
  BoundsReport rep;
  const auto& first = records.front();
  for (const auto& r : records) {
    rep.f_extrema_drift = std::max({rep.f_extrema_drift, std::abs(r.F_max - first.F_max),
                                    std::abs(r.F_min - first.F_min)});
    const double bound = w0_sup * r.rho_max;
    if (bound > 0.0) {
      rep.f_lipschitz_ratio = std::max(rep.f_lipschitz_ratio, r.max_dx_F / bound);
    } else if (r.max_dx_F > abs_floor) {
      rep.f_lipschitz_ratio = std::numeric_limits<double>::infinity();
    }
    if (r.max_dx_F > (1.0 + lipschitz_slack) * bound + abs_floor) rep.f_lipschitz_ok = false;
  }
  rep.f_transport_ok = rep.f_extrema_drift <= drift_tol * (1.0 + std::abs(first.F_max));
  return rep;
}

/// Values of the nonlinear maximum principle at the density maximum x̄:
/// either Λ^α θ(x̄) ≥ θ(x̄)^{1+α} / (c ‖φ‖^α) or θ(x̄) ≤ c ‖φ‖. `c_min`
/// is the smallest c for which one branch holds.
struct MaxPrincipleReport {
  double x_bar = 0.0;
  double lap_at_max = 0.0;
  double theta_at_max = 0.0;
  double phi_sup = 0.0;
  double c_min = 0.0;
};

inline MaxPrincipleReport nonlinear_max_principle_check(const RealField& rho, double alpha) {
  rho.validate("density");
  MaxPrincipleReport rep;
  const double kappa = rho.mean();
  const Extremum top = field_maximum(rho);
  rep.x_bar = top.x;
  rep.theta_at_max = std::max(top.value - kappa, 0.0);
  RealField theta = rho;
  theta += -kappa;
  // θ is centred by construction; near equilibrium it is pure round-off
  rep.phi_sup = sup_norm(mean_zero_primitive(theta, std::numeric_limits<double>::infinity()));
  rep.lap_at_max = TrigInterpolant(fractional_laplacian(rho, alpha))(rep.x_bar);
  if (rep.phi_sup <= 0.0 || rep.theta_at_max <= 0.0) {
    rep.c_min = 0.0;
    return rep;
  }
  const double c_second = rep.theta_at_max / rep.phi_sup;
  double c_first = std::numeric_limits<double>::infinity();
  if (rep.lap_at_max > 0.0) {
    c_first = std::pow(rep.theta_at_max, 1.0 + alpha) / (std::pow(rep.phi_sup, alpha) * rep.lap_at_max);
  }
  rep.c_min = std::min(c_first, c_second);
  return rep;
}

}  // namespace alignflow
