#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alignflow/diagnostics.hpp"
#include "alignflow/errors.hpp"
#include "alignflow/model.hpp"
#include "alignflow/spectral.hpp"

namespace alignflow {

struct StepperConfig {
  double cfl_transport = 0.4;
  double cfl_dissipation = 0.4;
  double t_end = 1.0;
  std::size_t max_steps = 1'000'000;
  std::size_t record_every = 1;
  double blowup_gradient_threshold = 1e4;
  double tail_fraction_threshold = 1e-4;
  /// Overrides the CFL step when set (convergence studies).
  std::optional<double> fixed_dt;
  /// Times at which the state is captured; steps are shortened to land on them.
  std::vector<double> output_times;
  /// Re-impose ∫ρu = momentum0 after each primitive step (see step_rk4).
  bool project_momentum = true;

  void validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!in_unit(cfl_transport)) throw ParameterError("cfl_transport must be in (0, 1]");
    if (!in_unit(cfl_dissipation)) throw ParameterError("cfl_dissipation must be in (0, 1]");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ParameterError("t_end must be positive");
    if (max_steps == 0) throw ParameterError("max_steps must be positive");
    if (record_every == 0) throw ParameterError("record_every must be positive");
    if (!(blowup_gradient_threshold > 0.0)) throw ParameterError("blowup_gradient_threshold must be positive");
    if (!(tail_fraction_threshold > 0.0 && tail_fraction_threshold < 1.0)) {
      throw ParameterError("tail_fraction_threshold must be in (0, 1)");
    }
    if (fixed_dt && !(*fixed_dt > 0.0)) throw ParameterError("fixed_dt must be positive");
    for (double t : output_times) {
      if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("output times must be nonnegative");
    }
  }

  friend bool operator==(const StepperConfig&, const StepperConfig&) = default;
};

enum class Termination { reached_t_end, blowup_detected, vacuum, step_limit };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::reached_t_end: return "reached_t_end";
    case Termination::blowup_detected: return "blowup_detected";
    case Termination::vacuum: return "vacuum";
    case Termination::step_limit: return "step_limit";
  }
  return "unknown";
}

struct Snapshot {
  double time = 0.0;
  SystemState state;
};

struct RunResult {
  SystemState final_state;
  std::vector<TrajectoryRecord> records;
  Termination termination = Termination::reached_t_end;
  double bkm_integral = 0.0;
  std::optional<double> blowup_time;
  /// Which monitor fired: "gradient" or "spectral_tail".
  std::string blowup_reason;
  /// Detail for vacuum or non-finite terminations.
  std::string message;
  std::size_t steps = 0;
  std::vector<Snapshot> snapshots;
};

/// The field whose gradient the regularity monitor watches.
inline const RealField& monitored_field(const SystemState& s) {
  return s.formulation == Formulation::burgers ? s.u : s.rho;
}

/// dt = min(cfl_t h / max|u|, cfl_d / (a k_max^α)) with a = max ρ, or ε
/// for Burgers.
inline double compute_dt(const SystemState& s, const ModelParams& p, const StepperConfig& cfg) {
  const SpectralGrid& g = s.grid();
  const double umax = std::max(velocity(s, p).max_abs(), 1e-12);
  double dt = cfg.cfl_transport * g.spacing() / umax;
  const double coeff = s.formulation == Formulation::burgers ? p.epsilon_burgers : s.rho.max();
  if (coeff > 0.0) {
    dt = std::min(dt, cfg.cfl_dissipation / (coeff * std::pow(g.max_retained_wavenumber(), p.alpha)));
  }
  return dt;
}

namespace detail {

inline RealField& second_field(SystemState& s) {
  return s.formulation == Formulation::reformulated ? s.G : s.u;
}

/// base + dt * rate, for the evolved unknowns only.
inline SystemState shifted(const SystemState& base, const StateRate& r, double dt) {
  SystemState out = base;
  if (!r.d_rho.empty()) out.rho.axpy(dt, r.d_rho);
  if (!r.d_second.empty()) second_field(out).axpy(dt, r.d_second);
  return out;
}

}  // namespace detail

/// Shifts u by the constant that restores ∫ρu = momentum0. This is the
/// primitive counterpart of I₀ in the reconstruction: RK4 preserves the
/// linear invariant ∫ρ exactly but the quadratic ∫ρu only to O(dt⁵) per step.
inline void project_momentum(SystemState& s) {
  if (s.formulation != Formulation::primitive) return;
  const double drift = s.momentum0 - grid_integral(pointwise_product(s.rho, s.u));
  s.u += drift / grid_integral(s.rho);
}

/// Classical four-stage Runge-Kutta step.
inline SystemState step_rk4(const SystemState& s, const ModelParams& p, double dt, bool fix_momentum = true) {
  if (!(dt > 0.0)) throw ParameterError("time step must be positive");
  const StateRate k1 = rhs(s, p);
  const StateRate k2 = rhs(detail::shifted(s, k1, 0.5 * dt), p);
  const StateRate k3 = rhs(detail::shifted(s, k2, 0.5 * dt), p);
  const StateRate k4 = rhs(detail::shifted(s, k3, dt), p);
  SystemState out = s;
  auto combine = [dt](RealField& f, const RealField& a, const RealField& b, const RealField& c, const RealField& d) {
    for (std::size_t j = 0; j < f.size(); ++j) f[j] += dt / 6.0 * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j]);
  };
  if (!k1.d_rho.empty()) combine(out.rho, k1.d_rho, k2.d_rho, k3.d_rho, k4.d_rho);
  if (!k1.d_second.empty()) {
    combine(detail::second_field(out), k1.d_second, k2.d_second, k3.d_second, k4.d_second);
  }
  if (fix_momentum) project_momentum(out);
  out.time = s.time + dt;
  return out;
}

/// Called after every accepted step with the new state and step count.
using StepObserver = std::function<void(const SystemState&, std::size_t)>;

struct RegularityProbe {
  double gradient_sup = 0.0;
  double tail_fraction = 0.0;
};

inline RegularityProbe probe_regularity(const SystemState& s) {
  const RealField& f = monitored_field(s);
  return {gradient_sup_on_fine_grid(f), spectral_tail_fraction(f)};
}

/// Integrates to cfg.t_end or until a termination condition fires.
inline RunResult run(const SystemState& initial, const ModelParams& p, const StepperConfig& cfg,
                     const StepObserver& observer = {}) {
  cfg.validate();
  p.validate(initial.formulation);
  if (initial.formulation != Formulation::burgers) check_no_vacuum(initial.rho);

  RunResult res;
  SystemState state = initial;
  std::vector<double> pending = cfg.output_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next_output = 0;
  auto capture_outputs = [&](const SystemState& s) {
    while (next_output < pending.size() && pending[next_output] <= s.time * (1.0 + 1e-14) + 1e-14) {
      res.snapshots.push_back({s.time, s});
      ++next_output;
    }
  };

  RegularityProbe probe = probe_regularity(state);
  double grad_sq_prev = probe.gradient_sup * probe.gradient_sup;
  res.records.push_back(make_record(state, p, 0.0));
  capture_outputs(state);

  auto blown_up = [&](const RegularityProbe& pr) {
    if (!std::isfinite(pr.gradient_sup) || pr.gradient_sup > cfg.blowup_gradient_threshold) {
      res.blowup_reason = "gradient";
      return true;
    }
    if (pr.tail_fraction > cfg.tail_fraction_threshold) {
      res.blowup_reason = "spectral_tail";
      return true;
    }
    return false;
  };

  bool recorded_last = true;
  if (blown_up(probe)) {
    res.termination = Termination::blowup_detected;
    res.blowup_time = state.time;
  } else {
    const double t_end = initial.time + cfg.t_end;
    while (true) {
      if (state.time >= t_end * (1.0 - 1e-15)) {
        res.termination = Termination::reached_t_end;
        break;
      }
      if (res.steps >= cfg.max_steps) {
        res.termination = Termination::step_limit;
        break;
      }
      SystemState next;
      try {
        double dt = cfg.fixed_dt ? *cfg.fixed_dt : compute_dt(state, p, cfg);
        double target = t_end;
        if (next_output < pending.size()) target = std::min(target, pending[next_output]);
        if (state.time + dt > target) dt = target - state.time;
        next = step_rk4(state, p, dt, cfg.project_momentum);
        if (next.time > target - 1e-14 * std::max(1.0, std::abs(target))) next.time = target;
        if (next.formulation != Formulation::burgers) check_no_vacuum(next.rho);
        monitored_field(next).validate("state");
      } catch (const VacuumError& e) {
        res.termination = Termination::vacuum;
        res.message = e.what();
        break;
      } catch (const InvalidFieldError& e) {
        res.termination = Termination::vacuum;
        res.message = std::string("non-finite state: ") + e.what();
        break;
      }
      const double dt_taken = next.time - state.time;
      state = std::move(next);
      ++res.steps;

      probe = probe_regularity(state);
      const double grad_sq = probe.gradient_sup * probe.gradient_sup;
      res.bkm_integral += 0.5 * dt_taken * (grad_sq_prev + grad_sq);
      grad_sq_prev = grad_sq;

      capture_outputs(state);
      if (observer) observer(state, res.steps);

      const bool stop = blown_up(probe);
      recorded_last = false;
      if (stop || res.steps % cfg.record_every == 0) {
        res.records.push_back(make_record(state, p, res.bkm_integral));
        recorded_last = true;
      }
      if (stop) {
        res.termination = Termination::blowup_detected;
        res.blowup_time = state.time;
        break;
      }
    }
  }
  if (!recorded_last) res.records.push_back(make_record(state, p, res.bkm_integral));
  res.final_state = std::move(state);
  return res;
}

}  // namespace alignflow
