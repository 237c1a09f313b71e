#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "alignflow/scenario.hpp"

namespace fs = std::filesystem;
using namespace alignflow;

namespace {

struct Globals {
  std::string output_dir;
  std::size_t record_every = 0;
  bool quiet = false;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void report_config_error(const ConfigError& e) {
  std::cerr << "invalid configuration:\n";
  for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
}

/// Command-line overrides win over the file.
void apply_overrides(RawConfig& raw, const Globals& g) {
  if (!g.output_dir.empty()) raw["output"]["dir"] = g.output_dir;
  if (g.record_every > 0) raw["stepper"]["record_every"] = std::to_string(g.record_every);
}

int finish(const ScenarioConfig& c, const ScenarioResult& r, const Globals& g) {
  std::vector<fs::path> files;
  try {
    files = write_outputs(c, r, c.output.dir);
  } catch (const std::exception& e) {
    std::cerr << "output failed: " << e.what() << "\n";
    return exit_io;
  }
  if (!g.quiet) {
    std::cout << c.name << ": " << r.status;
    if (c.task == Task::simulate) {
      std::cout << " (" << to_string(r.run.termination) << " at t = " << r.run.final_state.time << ", "
                << r.run.steps << " steps)";
    }
    std::cout << "\n";
    for (const auto& k : r.checks) std::cout << "  " << (k.passed ? "pass " : "FAIL ") << k.name << "\n";
    for (const auto& f : files) std::cout << "  wrote " << f.string() << "\n";
  }
  return r.exit_code;
}

int cmd_run(const std::string& path, const Globals& g, bool force_moc) {
  RawConfig raw;
  try {
    raw = parse_raw_config(read_text(path));
  } catch (const ConfigError& e) {
    report_config_error(e);
    return exit_usage;
  } catch (const std::ios_base::failure& e) {
    std::cerr << e.what() << "\n";
    return exit_io;
  }
  apply_overrides(raw, g);
  if (force_moc) raw["moc"]["enabled"] = "true";
  ScenarioConfig c;
  try {
    c = config_from_raw(raw);
  } catch (const ConfigError& e) {
    report_config_error(e);
    return exit_usage;
  }
  if (force_moc && c.model == Formulation::burgers) {
    std::cerr << "verify-moc needs an alignment model\n";
    return exit_usage;
  }
  ScenarioResult r;
  try {
    r = run_scenario(c);
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return exit_usage;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  }
  return finish(c, r, g);
}

int cmd_sweep(const std::string& path, const std::string& grid, unsigned jobs, const Globals& g) {
  RawConfig raw;
  std::vector<SweepAxis> axes;
  try {
    raw = parse_raw_config(read_text(path));
    axes = parse_grid_spec(grid);
  } catch (const ConfigError& e) {
    report_config_error(e);
    return exit_usage;
  } catch (const std::ios_base::failure& e) {
    std::cerr << e.what() << "\n";
    return exit_io;
  }
  apply_overrides(raw, g);
  const SweepSummary s = sweep(raw, axes, jobs);

  // single collector: all files are written here, after the runs
  const fs::path dir = raw["output"].count("dir") ? raw["output"]["dir"] : std::string("output");
  const std::string name = raw["scenario"].count("name") ? raw["scenario"]["name"] : std::string("scenario");
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::ios_base::failure("cannot create " + dir.string());
    detail::write_file(dir / (name + "_sweep.csv"), sweep_csv(s));
    for (const auto& row : s.rows) {
      if (row.result) write_outputs(*row.config, *row.result, row.config->output.dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "output failed: " << e.what() << "\n";
    return exit_io;
  }
  if (!g.quiet) {
    std::cout << sweep_csv(s);
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      if (!s.rows[i].message.empty()) std::cerr << "row " << i << ": " << s.rows[i].message << "\n";
    }
  }
  return s.exit_code;
}

int cmd_selftest(const Globals& g) {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    if (!ok) ++failures;
    if (!g.quiet || !ok) std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
  };
  try {
    const SpectralGrid grid(64);
    const RealField c3 = RealField::sample(grid, [](double x) { return std::cos(3.0 * x); });
    const RealField lap = fractional_laplacian(c3, 0.5);
    double err = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) err = std::max(err, std::abs(lap[j] - std::sqrt(3.0) * c3[j]));
    check("fractional Laplacian of a single mode", err < 1e-12);

    ScenarioConfig c;
    c.model = Formulation::special;
    c.n = 64;
    c.rho = {"single_mode", 1.0, 0.3};
    c.stepper.t_end = 0.5;
    const ScenarioResult r = run_scenario(c);
    const auto& recs = r.run.records;
    check("special model run reaches t_end", r.run.termination == Termination::reached_t_end);
    check("mass conserved", std::abs(recs.back().mass - recs.front().mass) <= 1e-12 * recs.front().mass);
    check("density checks pass", r.exit_code == exit_ok);

    const ModulusOfContinuity m(0.05, 0.5 * ModulusOfContinuity::max_gamma(0.05, 0.5), 0.5);
    check("dissipation functional positive", dissipation_D(0.01, m) > 0.0);
    check("config round trip", parse_config(emit_config(c)) == c);
  } catch (const std::exception& e) {
    std::cout << "FAIL exception: " << e.what() << "\n";
    ++failures;
  }
  return failures == 0 ? exit_ok : exit_check_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral solver and diagnostics for the 1D Euler alignment system"};
  app.require_subcommand(1);
  // global flags may follow the subcommand
  app.fallthrough();
  Globals g;
  app.add_option("--output-dir", g.output_dir, "Directory for output files (overrides [output] dir)");
  app.add_option("--record-every", g.record_every, "Record diagnostics every N steps")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress the summary on stdout");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario");
  run_cmd->add_option("config", config_path, "Scenario file")->required();

  std::string grid;
  unsigned jobs = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
  sweep_cmd->add_option("config", config_path, "Template scenario file")->required();
  sweep_cmd->add_option("--grid", grid, "Axes as section.key=v1,v2;section.key=...")->required();
  sweep_cmd->add_option("--jobs", jobs, "Concurrent runs (default: hardware threads)");

  auto* moc_cmd = app.add_subcommand("verify-moc", "Run with the modulus-of-continuity check enabled");
  moc_cmd->add_option("config", config_path, "Scenario file")->required();

  app.add_subcommand("selftest", "Quick internal consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  if (*run_cmd) return cmd_run(config_path, g, false);
  if (*moc_cmd) return cmd_run(config_path, g, true);
  if (*sweep_cmd) return cmd_sweep(config_path, grid, jobs, g);
  return cmd_selftest(g);
}
