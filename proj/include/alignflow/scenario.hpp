#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "alignflow/config.hpp"
#include "alignflow/diagnostics.hpp"
#include "alignflow/integrator.hpp"
#include "alignflow/model.hpp"
#include "alignflow/modulus.hpp"

namespace alignflow {

/// Process exit codes of the command line front end.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_blowup = 2,
  exit_check_failed = 3,
  exit_numerical = 4,
  exit_io = 5,
};

inline constexpr const char* kTimeseriesHeader =
    "time,mass,momentum,rho_min,rho_max,F_min,F_max,max_dx_F,flock_amp,bkm,u_l2";
inline constexpr const char* kSnapshotHeader = "time,x,rho,u,G,F";
inline constexpr const char* kReportSchema = "alignflow-report/1";
/// sup|F₀| below this counts as G₀ ≡ 0.
inline constexpr double kZeroF = 1e-10;

/// Samples a preset. `g_zero` is resolved by the caller since it needs ρ.
inline RealField build_profile(const FieldSpec& f, const SpectralGrid& g, std::uint32_t seed) {
  const double L = g.length();
  const double two_pi = 2.0 * std::numbers::pi;
  if (f.preset == "constant" || f.preset == "g_zero") return RealField(g, f.mean);
  if (f.preset == "single_mode") {
    return RealField::sample(g, [&](double x) { return f.mean + f.amplitude * std::cos(two_pi * f.wavenumber * x / L - f.phase); });
  }
  if (f.preset == "steep_front") {
    const double norm = std::tanh(f.sharpness);
    return RealField::sample(g, [&](double x) {
      return f.mean + f.amplitude * std::tanh(f.sharpness * std::sin(two_pi * x / L - f.phase)) / norm;
    });
  }
  if (f.preset == "random") {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<double> a(f.modes + 1), b(f.modes + 1);
    for (int m = 1; m <= f.modes; ++m) {
      a[m] = coef(rng) / m;
      b[m] = coef(rng) / m;
    }
    RealField shape = RealField::sample(g, [&](double x) {
      double v = 0.0;
      for (int m = 1; m <= f.modes; ++m) v += a[m] * std::cos(two_pi * m * x / L) + b[m] * std::sin(two_pi * m * x / L);
      return v;
    });
    // normalize so that the amplitude is the sup of the fluctuation
    const double peak = shape.max_abs();
    if (peak > 0.0) shape *= f.amplitude / peak;
    shape += f.mean;
    return shape;
  }
  throw ParameterError("unknown preset " + f.preset);
}

inline SystemState build_initial_state(const ScenarioConfig& c) {
  const SpectralGrid g(c.n, c.length);
  const double alpha = c.params.alpha;
  if (c.model == Formulation::burgers) return make_burgers_state(build_profile(c.velocity, g, c.seed + 1));
  const RealField rho = dealias(build_profile(c.rho, g, c.seed));
  if (c.model == Formulation::special) return make_special_state(rho, alpha, c.params.u_mean);
  RealField u = build_profile(c.velocity, g, c.seed + 1);
  if (c.velocity.preset == "g_zero") {
    // G₀ ≡ 0 velocity, perturbed by amplitude cos(2πkx/L − phase)
    FieldSpec pert = c.velocity;
    pert.preset = "single_mode";
    pert.mean = 0.0;
    u = build_profile(pert, g, c.seed + 1);
    u += special_velocity(rho, alpha, c.velocity.mean);
  }
  if (c.model == Formulation::primitive) return make_primitive_state(rho, u);
  return make_reformulated_state(rho, u, alpha);
}

/// G for any alignment state (zero for the special model).
inline RealField state_G(const SystemState& s, const ModelParams& p) {
  if (s.formulation == Formulation::reformulated) return s.G;
  if (s.formulation == Formulation::special) return RealField(s.rho.grid(), 0.0);
  return compute_G(s.rho, s.u, p.alpha);
}

struct CheckOutcome {
  std::string name;
  bool passed = true;
  nlohmann::ordered_json details;
};

struct ScenarioResult {
  int exit_code = exit_ok;
  std::string status;
  RunResult run;
  std::vector<CheckOutcome> checks;
  nlohmann::ordered_json report;
};

namespace detail {

inline nlohmann::ordered_json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

struct MocPlan {
  ModulusOfContinuity modulus;
  double lambda = 1.0;
  double rho_min = 0.0;
  bool searched = false;
};

/// Density floor for the whole run: ρ_min(0) for G₀ ≡ 0, otherwise the
/// vacuum bound at t_end.
inline double run_density_floor(double rho_min0, double F0_sup, double t_end) {
  return 1.0 / (1.0 / rho_min0 + t_end * F0_sup);
}

inline MocPlan plan_moc(const ScenarioConfig& c, const SystemState& s0, double F0_sup) {
  const double alpha = c.params.alpha;
  double m = c.moc.rho_min ? *c.moc.rho_min
                           : run_density_floor(field_minimum(s0.rho).value, F0_sup, c.stepper.t_end);
  double delta = 0.0, gamma = 0.0;
  bool searched = false;
  if (c.moc.delta) {
    delta = *c.moc.delta;
    gamma = *c.moc.gamma;
  } else {
    FeasibilityOptions opt;
    opt.c = c.moc.c;
    const FeasibilityResult fr = find_feasible_modulus(alpha, m, opt);
    if (!fr.found) throw ParameterError("no feasible modulus found for rho_min = " + std::to_string(m));
    delta = fr.delta;
    gamma = fr.gamma;
    searched = true;
  }
  ModulusOfContinuity mod = c.moc.c > 0.0 ? ModulusOfContinuity(delta, gamma, alpha, c.moc.c)
                                          : ModulusOfContinuity(delta, gamma, alpha);
  double lambda = 0.0;
  if (c.moc.lambda) {
    lambda = *c.moc.lambda;
  } else {
    lambda = std::exp(largest_admissible_log_lambda(s0.rho, mod)) * c.moc.lambda_safety;
  }
  return {mod, lambda, m, searched};
}

}  // namespace detail

/// Evaluates the breakthrough functional on the standard samples for the
/// configured (or searched) modulus.
inline ScenarioResult run_breakthrough(const ScenarioConfig& c) {
  ScenarioResult res;
  const double alpha = c.params.alpha;
  const double m = *c.moc.rho_min;
  double delta = 0.0, gamma = 0.0;
  if (c.moc.delta) {
    delta = *c.moc.delta;
    gamma = *c.moc.gamma;
  } else {
    FeasibilityOptions opt;
    opt.c = c.moc.c;
    const FeasibilityResult fr = find_feasible_modulus(alpha, m, opt);
    if (!fr.found) {
      res.exit_code = exit_check_failed;
      res.status = "infeasible";
      res.checks.push_back({"breakthrough", false, {{"rho_min", m}, {"searched", true}}});
    } else {
      delta = fr.delta;
      gamma = fr.gamma;
    }
  }
  if (delta > 0.0) {
    const ModulusOfContinuity mod = c.moc.c > 0.0 ? ModulusOfContinuity(delta, gamma, alpha, c.moc.c)
                                                  : ModulusOfContinuity(delta, gamma, alpha);
    const BreakthroughScan scan = scan_breakthrough(mod, m, breakthrough_samples(delta), {}, false);
    CheckOutcome chk{"breakthrough", scan.negative_everywhere,
                     {{"delta", delta},
                      {"gamma", gamma},
                      {"rho_min", m},
                      {"samples", scan.evaluated},
                      {"worst_value", scan.worst_value},
                      {"worst_xi", scan.worst_xi}}};
    res.checks.push_back(chk);
    res.exit_code = scan.negative_everywhere ? exit_ok : exit_check_failed;
    res.status = scan.negative_everywhere ? "feasible" : "infeasible";
  }
  return res;
}

inline ScenarioResult run_simulation(const ScenarioConfig& c) {
  ScenarioResult res;
  const ModelParams& p = c.params;
  const SystemState s0 = build_initial_state(c);
  const bool alignment = c.model != Formulation::burgers;

  double F0_sup = 0.0, w0_sup = 0.0;
  if (alignment) {
    const TransportedRatio tr0 = transported_ratio(s0.rho, state_G(s0, p));
    F0_sup = std::max(std::abs(tr0.F_min), std::abs(tr0.F_max));
    w0_sup = tr0.w_sup;
  }

  std::optional<detail::MocPlan> moc;
  if (c.moc.enabled && alignment) moc = detail::plan_moc(c, s0, F0_sup);

  // per-record monitors that need the full state
  double c_min_sup = 0.0;
  MocReport moc_worst;
  std::size_t moc_checks = 0;
  auto monitor = [&](const SystemState& s) {
    if (!alignment) return;
    if (c.diagnostics.max_principle) c_min_sup = std::max(c_min_sup, nonlinear_max_principle_check(s.rho, p.alpha).c_min);
    if (moc) {
      const MocReport r = moc_check(s.rho, moc->modulus, moc->lambda);
      ++moc_checks;
      if (r.margin < moc_worst.margin) moc_worst = r;
    }
  };
  monitor(s0);
  SystemState last_monitored;
  std::size_t last_step = 0;
  res.run = run(s0, p, c.stepper, [&](const SystemState& s, std::size_t step) {
    if (step % c.stepper.record_every == 0) {
      monitor(s);
      last_step = step;
    }
  });
  if (res.run.steps != last_step) monitor(res.run.final_state);
  moc_worst.obeys = moc_worst.margin > 0.0;

  const auto& recs = res.run.records;
  if (alignment && c.diagnostics.density_bounds) {
    const BoundsReport b = check_density_bounds(recs, F0_sup, recs.front().rho_min, c.diagnostics.bound_tolerance);
    // with G₀ ≡ 0 the minimum may not decrease
    bool monotone = true;
    double worst_drop = 0.0;
    if (F0_sup <= kZeroF) {
      for (std::size_t i = 1; i < recs.size(); ++i) worst_drop = std::max(worst_drop, recs[i - 1].rho_min - recs[i].rho_min);
      monotone = worst_drop <= 1e-8;
    }
    const bool ok = b.lower_bound_ok && monotone && (!c.diagnostics.late_growth || b.upper_bound_ok);
    res.checks.push_back({"density_bounds", ok,
                          {{"F0_sup", F0_sup},
                           {"lower_bound_ok", b.lower_bound_ok},
                           {"lower_bound_margin", b.lower_bound_margin},
                           {"sup_rho_max", b.sup_rho_max},
                           {"time_of_sup", b.time_of_sup},
                           {"no_late_growth", b.upper_bound_ok},
                           {"late_growth_enforced", c.diagnostics.late_growth},
                           {"rho_min_monotone", monotone},
                           {"rho_min_worst_drop", worst_drop}}});
  }
  if (alignment && c.diagnostics.f_transport && c.model != Formulation::special) {
    const BoundsReport b = check_F_transport(recs, w0_sup, c.diagnostics.f_drift_tolerance, c.diagnostics.f_lipschitz_slack);
    res.checks.push_back({"f_transport", b.f_transport_ok && b.f_lipschitz_ok,
                          {{"w0_sup", w0_sup},
                           {"extrema_drift", b.f_extrema_drift},
                           {"lipschitz_ratio", detail::finite_or_null(b.f_lipschitz_ratio)}}});
  }
  if (alignment && c.diagnostics.max_principle) {
    // informational: the dichotomy constant is reported, not thresholded
    res.checks.push_back({"max_principle", std::isfinite(c_min_sup), {{"c_min_sup", detail::finite_or_null(c_min_sup)}}});
  }
  if (moc) {
    res.checks.push_back({"moc", moc_worst.obeys,
                          {{"delta", moc->modulus.delta()},
                           {"gamma", moc->modulus.gamma()},
                           {"lambda", moc->lambda},
                           {"rho_min", moc->rho_min},
                           {"searched", moc->searched},
                           {"states_checked", moc_checks},
                           {"worst_margin", moc_worst.margin},
                           {"worst_x", moc_worst.x},
                           {"worst_y", moc_worst.y}}});
  }

  const bool checks_ok = std::all_of(res.checks.begin(), res.checks.end(), [](const auto& k) { return k.passed; });
  switch (res.run.termination) {
    case Termination::reached_t_end:
      if (c.diagnostics.expect_blowup) {
        res.exit_code = exit_check_failed;
        res.status = "expected blow-up not observed";
      } else {
        res.exit_code = checks_ok ? exit_ok : exit_check_failed;
        res.status = checks_ok ? "ok" : "check failed";
      }
      break;
    case Termination::blowup_detected:
      res.exit_code = c.diagnostics.expect_blowup ? exit_ok : exit_blowup;
      res.status = "blow-up detected";
      break;
    case Termination::vacuum:
    case Termination::step_limit:
      res.exit_code = exit_numerical;
      res.status = std::string(to_string(res.run.termination));
      break;
  }
  return res;
}

inline nlohmann::ordered_json build_report(const ScenarioConfig& c, const ScenarioResult& r) {
  nlohmann::ordered_json j;
  j["schema"] = kReportSchema;
  j["name"] = c.name;
  j["task"] = std::string(to_string(c.task));
  j["model"] = std::string(to_string(c.model));
  j["exit_code"] = r.exit_code;
  j["status"] = r.status;
  if (c.task == Task::simulate) {
    const RunResult& run = r.run;
    j["termination"] = std::string(to_string(run.termination));
    j["steps"] = run.steps;
    j["final_time"] = run.final_state.time;
    j["bkm_integral"] = detail::finite_or_null(run.bkm_integral);
    j["blowup_time"] = run.blowup_time ? nlohmann::ordered_json(*run.blowup_time) : nlohmann::ordered_json(nullptr);
    j["blowup_reason"] = run.blowup_reason;
    j["message"] = run.message;
    j["records"] = run.records.size();
  }
  nlohmann::ordered_json checks = nlohmann::ordered_json::object();
  for (const auto& k : r.checks) {
    nlohmann::ordered_json d = k.details;
    d["passed"] = k.passed;
    checks[k.name] = d;
  }
  j["checks"] = checks;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [sec, keys] : config_to_raw(c)) {
    for (const auto& [k, v] : keys) cfg[sec][k] = v;
  }
  j["config"] = cfg;
  return j;
}

/// Runs the configured task; library errors surface as exceptions.
inline ScenarioResult run_scenario(const ScenarioConfig& c) {
  ScenarioResult r = c.task == Task::simulate ? run_simulation(c) : run_breakthrough(c);
  r.report = build_report(c, r);
  return r;
}

namespace detail {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  return format_double(v);
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path.string());
  out << text;
  out.close();
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
}

}  // namespace detail

inline std::string timeseries_csv(const std::vector<TrajectoryRecord>& recs) {
  using detail::csv_number;
  std::string out = std::string(kTimeseriesHeader) + "\n";
  for (const auto& r : recs) {
    for (double v : {r.time, r.mass, r.momentum, r.rho_min, r.rho_max, r.F_min, r.F_max, r.max_dx_F,
                     r.flocking_amplitude, r.bkm_partial, r.u_l2_norm}) {
      out += csv_number(v);
      out += ',';
    }
    out.back() = '\n';
  }
  return out;
}

/// Long-format snapshot table. Density columns are nan for Burgers.
inline std::string snapshots_csv(const std::vector<Snapshot>& snaps, const ModelParams& p) {
  using detail::csv_number;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::string out = std::string(kSnapshotHeader) + "\n";
  for (const auto& sn : snaps) {
    const SystemState& s = sn.state;
    const RealField u = velocity(s, p);
    const bool burgers = s.formulation == Formulation::burgers;
    RealField G, F;
    if (!burgers) {
      G = state_G(s, p);
      F = compute_F(s.rho, G);
    }
    const SpectralGrid& g = s.grid();
    for (std::size_t j = 0; j < g.size(); ++j) {
      out += csv_number(sn.time) + ',' + csv_number(g.node(j)) + ',' + csv_number(burgers ? nan : s.rho[j]) + ',' +
             csv_number(u[j]) + ',' + csv_number(burgers ? nan : G[j]) + ',' + csv_number(burgers ? nan : F[j]) + '\n';
    }
  }
  return out;
}

/// Writes the enabled outputs under `dir`; throws std::ios_base::failure.
inline std::vector<std::filesystem::path> write_outputs(const ScenarioConfig& c, const ScenarioResult& r,
                                                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& suffix, const std::string& text) {
    const auto path = dir / (c.name + suffix);
    detail::write_file(path, text);
    written.push_back(path);
  };
  if (c.task == Task::simulate && c.output.timeseries) put("_timeseries.csv", timeseries_csv(r.run.records));
  if (c.task == Task::simulate && c.output.snapshots && !c.stepper.output_times.empty()) {
    put("_snapshots.csv", snapshots_csv(r.run.snapshots, c.params));
  }
  if (c.output.report) put("_report.json", r.report.dump(2) + "\n");
  return written;
}

// ---------------------------------------------------------------- sweeps

struct SweepAxis {
  std::string section;
  std::string key;
  std::vector<std::string> values;
};

/// "section.key=v1,v2;section.key=..." with the last axis varying fastest.
inline std::vector<SweepAxis> parse_grid_spec(const std::string& spec) {
  std::vector<SweepAxis> axes;
  std::vector<std::string> problems;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ';')) {
    part = detail::trim(part);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    const auto dot = part.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      problems.push_back("grid axis '" + part + "' is not section.key=v1,v2,...");
      continue;
    }
    SweepAxis ax{detail::trim(part.substr(0, dot)), detail::trim(part.substr(dot + 1, eq - dot - 1)), {}};
    std::stringstream vs(part.substr(eq + 1));
    std::string v;
    while (std::getline(vs, v, ',')) {
      v = detail::trim(v);
      if (!v.empty()) ax.values.push_back(v);
    }
    if (ax.values.empty()) problems.push_back("grid axis '" + part + "' has no values");
    const auto& schema = detail::config_schema();
    auto sec = schema.find(ax.section);
    if (sec == schema.end() || sec->second.count(ax.key) == 0) {
      problems.push_back("grid axis names unknown key " + ax.section + "." + ax.key);
    }
    axes.push_back(std::move(ax));
  }
  if (axes.empty() && problems.empty()) problems.push_back("empty parameter grid");
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return axes;
}

struct SweepRow {
  std::vector<std::string> values;
  int exit_code = exit_ok;
  std::string status;
  std::string message;
  std::optional<ScenarioConfig> config;
  std::optional<ScenarioResult> result;
};

struct SweepSummary {
  std::vector<SweepAxis> axes;
  std::vector<SweepRow> rows;
  /// 0 unless every row failed.
  int exit_code = exit_ok;
};

/// Library and configuration failures become the row's exit code.
inline SweepRow run_sweep_row(const RawConfig& raw, std::vector<std::string> values) {
  SweepRow row;
  row.values = std::move(values);
  try {
    row.config = config_from_raw(raw);
    row.result = run_scenario(*row.config);
    row.exit_code = row.result->exit_code;
    row.status = row.result->status;
  } catch (const ConfigError& e) {
    row.exit_code = exit_usage;
    row.status = "invalid config";
    row.message = e.what();
  } catch (const ParameterError& e) {
    // same mapping as a single run
    row.exit_code = exit_usage;
    row.status = "invalid parameters";
    row.message = e.what();
  } catch (const Error& e) {
    row.exit_code = exit_numerical;
    row.status = "error";
    row.message = e.what();
  }
  return row;
}

/// Runs every point of the grid, at most `workers` at a time. Rows keep
/// grid order regardless of completion order.
inline SweepSummary sweep(const RawConfig& base, const std::vector<SweepAxis>& axes, unsigned workers = 0) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();

  std::vector<std::pair<RawConfig, std::vector<std::string>>> points;
  points.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    RawConfig raw = base;
    std::vector<std::string> vals(axes.size());
    std::size_t rem = idx;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto& ax = axes[a];
      vals[a] = ax.values[rem % ax.values.size()];
      rem /= ax.values.size();
      raw[ax.section][ax.key] = vals[a];
    }
    // each row writes under its own name
    raw["scenario"]["name"] = (base.count("scenario") && base.at("scenario").count("name") ? base.at("scenario").at("name")
                                                                                           : std::string("scenario")) +
                              "_row" + std::to_string(idx);
    points.emplace_back(std::move(raw), std::move(vals));
  }

  SweepSummary out;
  out.axes = axes;
  out.rows.resize(total);
  std::size_t next = 0;
  while (next < total) {
    std::vector<std::future<SweepRow>> batch;
    const std::size_t first = next;
    for (; next < total && batch.size() < workers; ++next) {
      batch.push_back(std::async(std::launch::async, run_sweep_row, points[next].first, points[next].second));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) out.rows[first + k] = batch[k].get();
  }
  const bool all_failed =
      std::all_of(out.rows.begin(), out.rows.end(), [](const SweepRow& r) { return r.exit_code != exit_ok; });
  out.exit_code = all_failed ? exit_check_failed : exit_ok;
  return out;
}

inline std::string sweep_csv(const SweepSummary& s) {
  using detail::csv_number;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::string out = "row";
  for (const auto& a : s.axes) out += "," + a.section + "." + a.key;
  out += ",exit_code,status,termination,final_time,rho_min,rho_max,bkm,blowup_time,key_margin\n";
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const SweepRow& r = s.rows[i];
    out += std::to_string(i);
    for (const auto& v : r.values) out += "," + v;
    std::string termination = "none";
    double t = nan, lo = nan, hi = nan, bkm = nan, blow = nan, margin = nan;
    if (r.result && r.config->task == Task::simulate) {
      const RunResult& run = r.result->run;
      termination = std::string(to_string(run.termination));
      t = run.final_state.time;
      bkm = run.bkm_integral;
      if (run.blowup_time) blow = *run.blowup_time;
      for (const auto& rec : run.records) {
        lo = std::isnan(lo) ? rec.rho_min : std::min(lo, rec.rho_min);
        hi = std::isnan(hi) ? rec.rho_max : std::max(hi, rec.rho_max);
      }
    }
    // the most informative margin of each task
    if (r.result) {
      for (const auto& k : r.result->checks) {
        if (k.name == "breakthrough" && k.details.contains("worst_value")) margin = -k.details["worst_value"].get<double>();
        if (k.name == "moc") margin = k.details["worst_margin"].get<double>();
        if (k.name == "density_bounds" && std::isnan(margin)) margin = k.details["lower_bound_margin"].get<double>();
      }
    }
    out += "," + std::to_string(r.exit_code) + "," + r.status + "," + termination + "," + csv_number(t) + "," +
           csv_number(lo) + "," + csv_number(hi) + "," + csv_number(bkm) + "," + csv_number(blow) + "," +
           csv_number(margin) + "\n";
  }
  return out;
}

}  // namespace alignflow
