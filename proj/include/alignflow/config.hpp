#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "alignflow/errors.hpp"
#include "alignflow/integrator.hpp"
#include "alignflow/model.hpp"

namespace alignflow {

/// Rejected configuration. Carries every violation, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& p : v) out += (out.empty() ? "" : "\n") + p;
    return out;
  }
  std::vector<std::string> problems_;
};

enum class Task { simulate, breakthrough };

inline std::string_view to_string(Task t) { return t == Task::simulate ? "simulate" : "breakthrough"; }

/// Initial profile. Presets:
///   constant     mean
///   single_mode  mean + amplitude cos(2π k x / L − phase)
///   steep_front  mean + amplitude tanh(s sin(2π x / L − phase)) / tanh(s)
///   random       mean + amplitude · random modes 1..modes with 1/m decay
///   g_zero       velocity only: Λ^α applied to the primitive of ρ − κ, plus
///                mean, plus amplitude cos(2π k x / L − phase); G₀ ≡ 0 iff
///                amplitude = 0
struct FieldSpec {
  std::string preset = "constant";
  double mean = 0.0;
  double amplitude = 0.0;
  int wavenumber = 1;
  double phase = 0.0;
  double sharpness = 10.0;
  int modes = 4;

  friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

struct DiagnosticsSettings {
  bool density_bounds = true;
  /// Fail when the final tenth of the run exceeds the earlier ρ_max.
  bool late_growth = false;
  bool f_transport = true;
  bool max_principle = true;
  double bound_tolerance = 1e-3;
  double f_drift_tolerance = 1e-6;
  double f_lipschitz_slack = 1e-3;
  /// Maps blow-up detection to success.
  bool expect_blowup = false;

  friend bool operator==(const DiagnosticsSettings&, const DiagnosticsSettings&) = default;
};

/// Unset values mean "search for it".
struct MocSettings {
  bool enabled = false;
  std::optional<double> delta;
  std::optional<double> gamma;
  std::optional<double> lambda;
  std::optional<double> rho_min;
  /// Automatic λ is the largest admissible one times this factor.
  double lambda_safety = 0.5;
  /// Constant of γ < cδ; 0 picks the default.
  double c = 0.0;

  friend bool operator==(const MocSettings&, const MocSettings&) = default;
};

struct OutputSettings {
  std::string dir = "output";
  bool timeseries = true;
  bool snapshots = true;
  bool report = true;

  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  Task task = Task::simulate;
  std::uint32_t seed = 1;
  Formulation model = Formulation::primitive;
  ModelParams params;
  std::size_t n = 256;
  double length = 2.0 * std::numbers::pi;
  FieldSpec rho{"constant", 1.0};
  FieldSpec velocity{"constant", 0.0};
  StepperConfig stepper;
  DiagnosticsSettings diagnostics;
  MocSettings moc;
  OutputSettings output;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// section -> key -> raw value
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"scenario", {"name", "task", "seed"}},
      {"model", {"type", "alpha", "epsilon", "u_mean"}},
      {"grid", {"n", "length"}},
      {"rho", {"preset", "mean", "amplitude", "wavenumber", "phase", "sharpness", "modes"}},
      {"velocity", {"preset", "mean", "amplitude", "wavenumber", "phase", "sharpness", "modes"}},
      {"stepper",
       {"cfl_transport", "cfl_dissipation", "t_end", "max_steps", "record_every", "blowup_gradient_threshold",
        "tail_fraction_threshold", "fixed_dt", "output_times", "project_momentum"}},
      {"diagnostics",
       {"density_bounds", "late_growth", "f_transport", "max_principle", "bound_tolerance", "f_drift_tolerance",
        "f_lipschitz_slack", "expect_blowup"}},
      {"moc", {"enabled", "delta", "gamma", "lambda", "rho_min", "lambda_safety", "c"}},
      {"output", {"dir", "timeseries", "snapshots", "report"}},
  };
  return schema;
}

/// Shortest %g form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Typed reads that record problems instead of throwing.
class Reader {
 public:
  Reader(const RawConfig& raw, std::vector<std::string>& problems) : raw_(raw), problems_(problems) {}

  const std::string* find(const std::string& sec, const std::string& key) const {
    auto s = raw_.find(sec);
    if (s == raw_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  void real(const std::string& sec, const std::string& key, double& out) {
    if (const auto* v = find(sec, key)) {
      if (auto d = parse_real(*v)) {
        out = *d;
      } else {
        bad(sec, key, *v, "a number");
      }
    }
  }

  void optional_real(const std::string& sec, const std::string& key, std::optional<double>& out) {
    if (const auto* v = find(sec, key)) {
      if (*v == "auto") {
        out.reset();
      } else if (auto d = parse_real(*v)) {
        out = *d;
      } else {
        bad(sec, key, *v, "a number or auto");
      }
    }
  }

  template <typename Int>
  void integer(const std::string& sec, const std::string& key, Int& out) {
    if (const auto* v = find(sec, key)) {
      try {
        std::size_t pos = 0;
        const long long x = std::stoll(*v, &pos);
        if (pos != v->size() || x < 0) throw std::invalid_argument("");
        out = static_cast<Int>(x);
      } catch (const std::exception&) {
        bad(sec, key, *v, "a nonnegative integer");
      }
    }
  }

  void boolean(const std::string& sec, const std::string& key, bool& out) {
    if (const auto* v = find(sec, key)) {
      if (*v == "true" || *v == "yes" || *v == "1") {
        out = true;
      } else if (*v == "false" || *v == "no" || *v == "0") {
        out = false;
      } else {
        bad(sec, key, *v, "true or false");
      }
    }
  }

  void text(const std::string& sec, const std::string& key, std::string& out) {
    if (const auto* v = find(sec, key)) out = *v;
  }

  void real_list(const std::string& sec, const std::string& key, std::vector<double>& out) {
    if (const auto* v = find(sec, key)) {
      out.clear();
      std::stringstream ss(*v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (auto d = parse_real(item)) {
          out.push_back(*d);
        } else {
          bad(sec, key, *v, "a comma-separated list of numbers");
          return;
        }
      }
    }
  }

 private:
  static std::optional<double> parse_real(const std::string& s) {
    if (s == "2pi") return 2.0 * std::numbers::pi;
    try {
      std::size_t pos = 0;
      const double d = std::stod(s, &pos);
      if (pos != s.size()) return std::nullopt;
      return d;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  void bad(const std::string& sec, const std::string& key, const std::string& v, const char* want) {
    problems_.push_back("[" + sec + "] " + key + " = '" + v + "' is not " + want);
  }

  const RawConfig& raw_;
  std::vector<std::string>& problems_;
};

inline void read_field(Reader& r, const std::string& sec, FieldSpec& f) {
  r.text(sec, "preset", f.preset);
  r.real(sec, "mean", f.mean);
  r.real(sec, "amplitude", f.amplitude);
  r.integer(sec, "wavenumber", f.wavenumber);
  r.real(sec, "phase", f.phase);
  r.real(sec, "sharpness", f.sharpness);
  r.integer(sec, "modes", f.modes);
}

}  // namespace detail

/// INI text to sections. Syntax errors carry the line number.
inline RawConfig parse_raw_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError({"syntax error at line " + std::to_string(e.line()) + ": " + e.message()});
  }
  RawConfig raw;
  std::vector<std::string> problems;
  for (const auto& [section, node] : tree) {
    if (node.empty()) {
      // an empty section and a bare top-level key look alike in the tree
      if (!node.data().empty()) {
        problems.push_back("key '" + section + "' appears outside any section");
      } else {
        raw[section];
      }
      continue;
    }
    for (const auto& [key, value] : node) {
      if (!value.empty()) {
        problems.push_back("[" + section + "] " + key + " has nested children");
        continue;
      }
      raw[section][key] = detail::trim(value.data());
    }
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return raw;
}

/// Semantic checks on a complete config; returns every violation.
inline std::vector<std::string> validate_config(const ScenarioConfig& c) {
  std::vector<std::string> out;
  auto need = [&](bool ok, std::string msg) {
    if (!ok) out.push_back(std::move(msg));
  };
  const bool burgers = c.model == Formulation::burgers;
  if (burgers) {
    need(c.params.alpha > 0.0 && c.params.alpha < 2.0, "[model] alpha must be in (0, 2) for burgers");
    need(c.params.epsilon_burgers >= 0.0, "[model] epsilon must be nonnegative");
  } else {
    need(c.params.alpha > 0.0 && c.params.alpha < 1.0,
         "[model] alpha = " + detail::format_double(c.params.alpha) +
             " is outside (0, 1), the range where global regularity holds for the alignment system");
  }
  need(std::isfinite(c.params.u_mean), "[model] u_mean must be finite");
  need(c.n >= SpectralGrid::kMinPoints && c.n % 2 == 0, "[grid] n must be even and at least 8");
  need(c.n <= (1u << 20), "[grid] n is larger than 2^20");
  need(c.length > 0.0 && std::isfinite(c.length), "[grid] length must be positive");
  need(!c.name.empty() && c.name.find_first_of("/\\") == std::string::npos,
       "[scenario] name must be nonempty without path separators");

  auto check_field = [&](const FieldSpec& f, const std::string& sec, bool velocity) {
    static const std::set<std::string> presets{"constant", "single_mode", "steep_front", "random", "g_zero"};
    need(presets.count(f.preset) == 1, "[" + sec + "] preset '" + f.preset + "' is unknown");
    need(velocity || f.preset != "g_zero", "[" + sec + "] g_zero applies to the velocity only");
    need(std::isfinite(f.mean) && std::isfinite(f.amplitude) && std::isfinite(f.phase),
         "[" + sec + "] values must be finite");
    need(f.wavenumber >= 1, "[" + sec + "] wavenumber must be at least 1");
    need(f.sharpness > 0.0, "[" + sec + "] sharpness must be positive");
    need(f.modes >= 1 && static_cast<std::size_t>(f.modes) <= c.n / 3, "[" + sec + "] modes must be in [1, n/3]");
    if (f.preset == "single_mode") {
      need(static_cast<std::size_t>(f.wavenumber) <= c.n / 3, "[" + sec + "] wavenumber exceeds the dealiased band");
    }
  };
  check_field(c.rho, "rho", false);
  check_field(c.velocity, "velocity", true);
  if (!burgers) {
    need(c.rho.mean - std::abs(c.rho.amplitude) > 0.0, "[rho] mean - |amplitude| must be positive (no vacuum)");
  }
  if (burgers) need(c.velocity.preset != "g_zero", "[velocity] g_zero needs a density");

  const StepperConfig& s = c.stepper;
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  need(in_unit(s.cfl_transport), "[stepper] cfl_transport must be in (0, 1]");
  need(in_unit(s.cfl_dissipation), "[stepper] cfl_dissipation must be in (0, 1]");
  need(s.t_end > 0.0 && std::isfinite(s.t_end), "[stepper] t_end must be positive");
  need(s.max_steps > 0, "[stepper] max_steps must be positive");
  need(s.record_every > 0, "[stepper] record_every must be positive");
  need(s.blowup_gradient_threshold > 0.0, "[stepper] blowup_gradient_threshold must be positive");
  need(s.tail_fraction_threshold > 0.0 && s.tail_fraction_threshold < 1.0,
       "[stepper] tail_fraction_threshold must be in (0, 1)");
  need(!s.fixed_dt || *s.fixed_dt > 0.0, "[stepper] fixed_dt must be positive");
  for (double t : s.output_times) need(t >= 0.0 && std::isfinite(t), "[stepper] output_times must be nonnegative");

  const DiagnosticsSettings& d = c.diagnostics;
  need(d.bound_tolerance >= 0.0 && d.bound_tolerance < 1.0, "[diagnostics] bound_tolerance must be in [0, 1)");
  need(d.f_drift_tolerance >= 0.0, "[diagnostics] f_drift_tolerance must be nonnegative");
  need(d.f_lipschitz_slack >= 0.0, "[diagnostics] f_lipschitz_slack must be nonnegative");

  const MocSettings& m = c.moc;
  need(m.delta.has_value() == m.gamma.has_value(), "[moc] delta and gamma must both be given or both be auto");
  need(!m.delta || *m.delta > 0.0, "[moc] delta must be positive");
  need(!m.gamma || *m.gamma > 0.0, "[moc] gamma must be positive");
  need(!m.lambda || (*m.lambda > 0.0 && *m.lambda <= 1.0), "[moc] lambda must be in (0, 1]");
  need(!m.rho_min || *m.rho_min > 0.0, "[moc] rho_min must be positive");
  need(m.lambda_safety > 0.0 && m.lambda_safety <= 1.0, "[moc] lambda_safety must be in (0, 1]");
  need(m.c >= 0.0, "[moc] c must be nonnegative");
  if (c.task == Task::breakthrough) {
    need(!burgers, "[scenario] the breakthrough task needs an alignment model");
    need(c.moc.rho_min.has_value(), "[moc] the breakthrough task needs rho_min");
  }
  need(!c.output.dir.empty(), "[output] dir must be nonempty");
  return out;
}

/// Builds a config from raw sections: unknown sections or keys, malformed
/// values and semantic violations are all reported together.
inline ScenarioConfig config_from_raw(const RawConfig& raw) {
  std::vector<std::string> problems;
  const auto& schema = detail::config_schema();
  for (const auto& [sec, keys] : raw) {
    auto s = schema.find(sec);
    if (s == schema.end()) {
      problems.push_back("unknown section [" + sec + "]");
      continue;
    }
    for (const auto& [key, value] : keys) {
      if (s->second.count(key) == 0) problems.push_back("unknown key '" + key + "' in [" + sec + "]");
    }
  }

  ScenarioConfig c;
  detail::Reader r(raw, problems);
  r.text("scenario", "name", c.name);
  if (const auto* t = r.find("scenario", "task")) {
    if (*t == "simulate") {
      c.task = Task::simulate;
    } else if (*t == "breakthrough") {
      c.task = Task::breakthrough;
    } else {
      problems.push_back("[scenario] task '" + *t + "' is not simulate or breakthrough");
    }
  }
  r.integer("scenario", "seed", c.seed);

  if (const auto* t = r.find("model", "type")) {
    if (auto f = parse_formulation(*t)) {
      c.model = *f;
    } else {
      problems.push_back("[model] type '" + *t + "' is not primitive, reformulated, special or burgers");
    }
  }
  r.real("model", "alpha", c.params.alpha);
  r.real("model", "epsilon", c.params.epsilon_burgers);
  r.real("model", "u_mean", c.params.u_mean);
  r.integer("grid", "n", c.n);
  r.real("grid", "length", c.length);
  detail::read_field(r, "rho", c.rho);
  detail::read_field(r, "velocity", c.velocity);

  StepperConfig& s = c.stepper;
  r.real("stepper", "cfl_transport", s.cfl_transport);
  r.real("stepper", "cfl_dissipation", s.cfl_dissipation);
  r.real("stepper", "t_end", s.t_end);
  r.integer("stepper", "max_steps", s.max_steps);
  r.integer("stepper", "record_every", s.record_every);
  r.real("stepper", "blowup_gradient_threshold", s.blowup_gradient_threshold);
  r.real("stepper", "tail_fraction_threshold", s.tail_fraction_threshold);
  r.optional_real("stepper", "fixed_dt", s.fixed_dt);
  r.real_list("stepper", "output_times", s.output_times);
  r.boolean("stepper", "project_momentum", s.project_momentum);

  DiagnosticsSettings& d = c.diagnostics;
  r.boolean("diagnostics", "density_bounds", d.density_bounds);
  r.boolean("diagnostics", "late_growth", d.late_growth);
  r.boolean("diagnostics", "f_transport", d.f_transport);
  r.boolean("diagnostics", "max_principle", d.max_principle);
  r.real("diagnostics", "bound_tolerance", d.bound_tolerance);
  r.real("diagnostics", "f_drift_tolerance", d.f_drift_tolerance);
  r.real("diagnostics", "f_lipschitz_slack", d.f_lipschitz_slack);
  r.boolean("diagnostics", "expect_blowup", d.expect_blowup);

  MocSettings& m = c.moc;
  r.boolean("moc", "enabled", m.enabled);
  r.optional_real("moc", "delta", m.delta);
  r.optional_real("moc", "gamma", m.gamma);
  r.optional_real("moc", "lambda", m.lambda);
  r.optional_real("moc", "rho_min", m.rho_min);
  r.real("moc", "lambda_safety", m.lambda_safety);
  r.real("moc", "c", m.c);

  r.text("output", "dir", c.output.dir);
  r.boolean("output", "timeseries", c.output.timeseries);
  r.boolean("output", "snapshots", c.output.snapshots);
  r.boolean("output", "report", c.output.report);

  if (problems.empty()) problems = validate_config(c);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

inline ScenarioConfig parse_config(const std::string& text) { return config_from_raw(parse_raw_config(text)); }

/// Every key written explicitly, numbers with round-trip precision.
inline RawConfig config_to_raw(const ScenarioConfig& c) {
  using detail::format_double;
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("auto"); };
  RawConfig raw;
  raw["scenario"] = {{"name", c.name}, {"task", std::string(to_string(c.task))}, {"seed", std::to_string(c.seed)}};
  raw["model"] = {{"type", std::string(to_string(c.model))},
                  {"alpha", format_double(c.params.alpha)},
                  {"epsilon", format_double(c.params.epsilon_burgers)},
                  {"u_mean", format_double(c.params.u_mean)}};
  raw["grid"] = {{"n", std::to_string(c.n)}, {"length", format_double(c.length)}};
  auto field = [&](const FieldSpec& f) {
    return std::map<std::string, std::string>{{"preset", f.preset},
                                              {"mean", format_double(f.mean)},
                                              {"amplitude", format_double(f.amplitude)},
                                              {"wavenumber", std::to_string(f.wavenumber)},
                                              {"phase", format_double(f.phase)},
                                              {"sharpness", format_double(f.sharpness)},
                                              {"modes", std::to_string(f.modes)}};
  };
  raw["rho"] = field(c.rho);
  raw["velocity"] = field(c.velocity);
  const StepperConfig& s = c.stepper;
  std::string times;
  for (double t : s.output_times) times += (times.empty() ? "" : ", ") + format_double(t);
  raw["stepper"] = {{"cfl_transport", format_double(s.cfl_transport)},
                    {"cfl_dissipation", format_double(s.cfl_dissipation)},
                    {"t_end", format_double(s.t_end)},
                    {"max_steps", std::to_string(s.max_steps)},
                    {"record_every", std::to_string(s.record_every)},
                    {"blowup_gradient_threshold", format_double(s.blowup_gradient_threshold)},
                    {"tail_fraction_threshold", format_double(s.tail_fraction_threshold)},
                    {"fixed_dt", opt(s.fixed_dt)},
                    {"output_times", times},
                    {"project_momentum", b(s.project_momentum)}};
  const DiagnosticsSettings& d = c.diagnostics;
  raw["diagnostics"] = {{"density_bounds", b(d.density_bounds)},
                        {"late_growth", b(d.late_growth)},
                        {"f_transport", b(d.f_transport)},
                        {"max_principle", b(d.max_principle)},
                        {"bound_tolerance", format_double(d.bound_tolerance)},
                        {"f_drift_tolerance", format_double(d.f_drift_tolerance)},
                        {"f_lipschitz_slack", format_double(d.f_lipschitz_slack)},
                        {"expect_blowup", b(d.expect_blowup)}};
  const MocSettings& m = c.moc;
  raw["moc"] = {{"enabled", b(m.enabled)},          {"delta", opt(m.delta)},
                {"gamma", opt(m.gamma)},            {"lambda", opt(m.lambda)},
                {"rho_min", opt(m.rho_min)},        {"lambda_safety", format_double(m.lambda_safety)},
                {"c", format_double(m.c)}};
  raw["output"] = {{"dir", c.output.dir},
                   {"timeseries", b(c.output.timeseries)},
                   {"snapshots", b(c.output.snapshots)},
                   {"report", b(c.output.report)}};
  return raw;
}

inline std::string emit_config(const ScenarioConfig& c) {
  std::string out;
  // fixed section order so emitted files diff cleanly
  const RawConfig raw = config_to_raw(c);
  for (const char* sec : {"scenario", "model", "grid", "rho", "velocity", "stepper", "diagnostics", "moc", "output"}) {
    out += std::string(out.empty() ? "" : "\n") + "[" + sec + "]\n";
    for (const auto& [k, v] : raw.at(sec)) out += k + " = " + v + "\n";
  }
  return out;
}

}  // namespace alignflow
