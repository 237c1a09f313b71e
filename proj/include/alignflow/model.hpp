#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "alignflow/errors.hpp"
#include "alignflow/field.hpp"
#include "alignflow/spectral.hpp"

namespace alignflow {

/// Which set of unknowns a state evolves.
///
/// - primitive:    (ρ, u) of the Euler alignment system
/// - reformulated: (ρ, G) with G = ∂_x u − Λ^α ρ transported like ρ
/// - special:      ρ only, the G ≡ 0 reduction with ∂_x u = Λ^α ρ
/// - burgers:      u only, fractional Burgers comparison model
enum class Formulation { primitive, reformulated, special, burgers };

inline std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::primitive: return "primitive";
    case Formulation::reformulated: return "reformulated";
    case Formulation::special: return "special";
    case Formulation::burgers: return "burgers";
  }
  return "unknown";
}

inline std::optional<Formulation> parse_formulation(std::string_view s) {
  if (s == "primitive") return Formulation::primitive;
  if (s == "reformulated") return Formulation::reformulated;
  if (s == "special") return Formulation::special;
  if (s == "burgers") return Formulation::burgers;
  return std::nullopt;
}

struct ModelParams {
  double alpha = 0.5;
  /// Dissipation coefficient of the Burgers comparison model.
  double epsilon_burgers = 0.0;
  /// Mean velocity of the special model; zero in the co-moving frame.
  double u_mean = 0.0;

  /// Alignment models need α in (0, 1); Burgers accepts (0, 2).
  void validate(Formulation f) const {
    if (f == Formulation::burgers) {
      check_fractional_order(alpha);
      if (!(epsilon_burgers >= 0.0)) throw ParameterError("Burgers epsilon must be nonnegative");
    } else if (!(alpha > 0.0 && alpha < 1.0)) {
      throw ParameterError("alignment models require alpha in (0, 1)");
    }
    if (!std::isfinite(u_mean)) throw ParameterError("u_mean must be finite");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Evolved unknowns plus the conserved momentum ∫ρ₀u₀. Fields that the
/// formulation does not carry are left empty.
struct SystemState {
  Formulation formulation = Formulation::primitive;
  RealField rho;
  RealField u;
  RealField G;
  double momentum0 = 0.0;
  double time = 0.0;

  const SpectralGrid& grid() const { return formulation == Formulation::burgers ? u.grid() : rho.grid(); }
};

/// Quantities derived from (ρ, G) by the velocity reconstruction.
struct DerivedFields {
  RealField theta;
  RealField phi;
  RealField psi;
  RealField F;
  double kappa = 0.0;
  double I0 = 0.0;
};

/// min ρ at or below this fraction of the mean density counts as vacuum.
inline constexpr double kVacuumFraction = 1e-8;

inline void check_no_vacuum(const RealField& rho) {
  rho.validate("density");
  const double kappa = rho.mean();
  const double lo = rho.min();
  if (!(kappa > 0.0) || lo <= kVacuumFraction * kappa) {
    throw VacuumError("density reached vacuum (min " + std::to_string(lo) + ", mean " +
                      std::to_string(kappa) + ")");
  }
}

/// Tolerance on the mean of G, relative to max(|G|, 1).
inline constexpr double kMeanTolerance = 1e-10;

inline void check_zero_mean(const RealField& G) {
  const double mean = G.mean();
  if (std::abs(mean) > kMeanTolerance * std::max(G.max_abs(), 1.0)) {
    throw MeanViolationError("G must have zero mean, got " + std::to_string(mean));
  }
}

inline double grid_integral(const RealField& f) { return f.grid().length() * f.mean(); }

/// G = ∂_x u − Λ^α ρ.
inline RealField compute_G(const RealField& rho, const RealField& u, double alpha) {
  rho.check_same_grid(u);
  RealField G = derivative(u);
  G -= fractional_laplacian(rho, alpha);
  return G;
}

/// F = G / ρ.
inline RealField compute_F(const RealField& rho, const RealField& G) {
  rho.check_same_grid(G);
  check_no_vacuum(rho);
  RealField F(rho.grid());
  for (std::size_t j = 0; j < F.size(); ++j) F[j] = G[j] / rho[j];
  return F;
}

/// θ, φ, ψ, F, κ and I₀ for a density/G pair.
inline DerivedFields derive_fields(const RealField& rho, const RealField& G, double momentum0) {
  rho.check_same_grid(G);
  check_no_vacuum(rho);
  check_zero_mean(G);
  DerivedFields d;
  d.kappa = rho.mean();
  d.theta = rho;
  d.theta += -d.kappa;
  d.phi = mean_zero_primitive(d.theta);
  RealField centred = G;
  centred += -G.mean();
  // centred already; a G that is pure round-off would fail the relative mean test
  d.psi = mean_zero_primitive(centred, std::numeric_limits<double>::infinity());
  d.F = compute_F(rho, G);
  const double L = rho.grid().length();
  d.I0 = (momentum0 - grid_integral(pointwise_product(rho, d.psi))) / (d.kappa * L);
  return d;
}

/// u = Λ^α φ + ψ + I₀, the unique velocity with ∂_x u = Λ^α ρ + G and
/// ∫ρu = momentum0. I₀ drops ∫ρ Λ^α φ, which vanishes identically.
inline RealField reconstruct_velocity(const RealField& rho, const RealField& G, double momentum0,
                                      double alpha) {
  rho.check_same_grid(G);
  check_no_vacuum(rho);
  check_zero_mean(G);
  const double kappa = rho.mean();
  RealField theta = rho;
  theta += -kappa;
  RealField u = fractional_laplacian_of_primitive(theta, alpha);
  RealField centred = G;
  centred += -G.mean();
  RealField psi = mean_zero_primitive(centred, std::numeric_limits<double>::infinity());
  const double L = rho.grid().length();
  const double I0 = (momentum0 - grid_integral(pointwise_product(rho, psi))) / (kappa * L);
  u += psi;
  u += I0;
  return u;
}

/// u = Λ^α φ + u_mean for the special model.
inline RealField special_velocity(const RealField& rho, double alpha, double u_mean) {
  RealField theta = rho;
  theta += -rho.mean();
  RealField u = fractional_laplacian_of_primitive(theta, alpha);
  u += u_mean;
  return u;
}

/// Time derivatives of the evolved unknowns. `d_second` is d_u
/// (primitive, burgers) or d_G (reformulated) and empty for special.
struct StateRate {
  RealField d_rho;
  RealField d_second;
};

/// −∂_x P(ρu) with P the two-thirds projection.
inline RealField flux_divergence(const RealField& density, const RealField& u) {
  RealField d = derivative(dealiased_product(density, u));
  d *= -1.0;
  return d;
}

/// Primitive system: the alignment force is written as uΛ^αρ − Λ^α(ρu).
inline StateRate rhs_primitive(const RealField& rho, const RealField& u, double alpha) {
  rho.check_same_grid(u);
  check_no_vacuum(rho);
  const RealField rho_u = dealiased_product(rho, u);
  StateRate r;
  r.d_rho = derivative(rho_u);
  r.d_rho *= -1.0;
  const RealField lap_rho = fractional_laplacian(rho, alpha);
  r.d_second = dealiased_product(u, lap_rho);
  r.d_second -= dealiased_product(u, derivative(u));
  r.d_second -= fractional_laplacian(rho_u, alpha);
  return r;
}

inline StateRate rhs_reformulated(const RealField& rho, const RealField& G, double momentum0, double alpha) {
  const RealField u = reconstruct_velocity(rho, G, momentum0, alpha);
  return {flux_divergence(rho, u), flux_divergence(G, u)};
}

inline RealField rhs_special(const RealField& rho, double alpha, double u_mean = 0.0) {
  check_no_vacuum(rho);
  return flux_divergence(rho, special_velocity(rho, alpha, u_mean));
}

/// −u ∂_x u − ε Λ^α u.
inline RealField rhs_burgers(const RealField& u, double alpha, double epsilon) {
  u.validate("Burgers velocity");
  check_fractional_order(alpha);
  if (!(epsilon >= 0.0)) throw ParameterError("Burgers epsilon must be nonnegative");
  RealField d = dealiased_product(u, derivative(u));
  d *= -1.0;
  if (epsilon > 0.0) d.axpy(-epsilon, fractional_laplacian(u, alpha));
  return d;
}

inline StateRate rhs(const SystemState& s, const ModelParams& p) {
  switch (s.formulation) {
    case Formulation::primitive: return rhs_primitive(s.rho, s.u, p.alpha);
    case Formulation::reformulated: return rhs_reformulated(s.rho, s.G, s.momentum0, p.alpha);
    case Formulation::special: return {rhs_special(s.rho, p.alpha, p.u_mean), RealField()};
    case Formulation::burgers: return {RealField(), rhs_burgers(s.u, p.alpha, p.epsilon_burgers)};
  }
  throw ParameterError("unknown formulation");
}

/// The velocity field of a state, reconstructing it where it is not evolved.
inline RealField velocity(const SystemState& s, const ModelParams& p) {
  switch (s.formulation) {
    case Formulation::primitive:
    case Formulation::burgers: return s.u;
    case Formulation::reformulated: return reconstruct_velocity(s.rho, s.G, s.momentum0, p.alpha);
    case Formulation::special: return special_velocity(s.rho, p.alpha, p.u_mean);
  }
  throw ParameterError("unknown formulation");
}

/// G for any state carrying a density (zero for the special model).
inline RealField constraint_field(const SystemState& s, const ModelParams& p) {
  switch (s.formulation) {
    case Formulation::primitive: return compute_G(s.rho, s.u, p.alpha);
    case Formulation::reformulated: return s.G;
    case Formulation::special: return RealField(s.rho.grid());
    case Formulation::burgers: break;
  }
  throw ParameterError("Burgers states carry no density");
}

// State constructors. Initial fields are projected onto the dealiased band.

inline SystemState make_primitive_state(const RealField& rho0, const RealField& u0) {
  rho0.check_same_grid(u0);
  SystemState s;
  s.formulation = Formulation::primitive;
  s.rho = dealias(rho0);
  s.u = dealias(u0);
  check_no_vacuum(s.rho);
  s.momentum0 = grid_integral(pointwise_product(s.rho, s.u));
  return s;
}

/// Primitive state whose velocity satisfies G₀ = ∂_x u₀ − Λ^α ρ₀ ≡ 0.
inline SystemState make_special_data(const RealField& rho0, double alpha, double u_mean = 0.0) {
  const RealField rho = dealias(rho0);
  check_no_vacuum(rho);
  return make_primitive_state(rho, special_velocity(rho, alpha, u_mean));
}

inline SystemState make_reformulated_state(const RealField& rho0, const RealField& u0, double alpha) {
  SystemState s = make_primitive_state(rho0, u0);
  s.formulation = Formulation::reformulated;
  s.G = compute_G(s.rho, s.u, alpha);
  s.G += -s.G.mean();
  s.u = RealField();
  return s;
}

inline SystemState make_special_state(const RealField& rho0, double alpha, double u_mean = 0.0) {
  SystemState s;
  s.formulation = Formulation::special;
  s.rho = dealias(rho0);
  check_no_vacuum(s.rho);
  s.momentum0 = grid_integral(pointwise_product(s.rho, special_velocity(s.rho, alpha, u_mean)));
  return s;
}

inline SystemState make_burgers_state(const RealField& u0) {
  SystemState s;
  s.formulation = Formulation::burgers;
  s.u = dealias(u0);
  s.u.validate("Burgers velocity");
  s.momentum0 = grid_integral(s.u);
  return s;
}

/// Converts a primitive state to (ρ, G) form with G = compute_G(ρ, u).
inline SystemState to_reformulated(const SystemState& primitive, double alpha) {
  if (primitive.formulation != Formulation::primitive) throw ParameterError("expected a primitive state");
  SystemState s = primitive;
  s.formulation = Formulation::reformulated;
  s.G = compute_G(s.rho, s.u, alpha);
  s.G += -s.G.mean();
  s.u = RealField();
  return s;
}

}  // namespace alignflow
