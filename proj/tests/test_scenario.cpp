#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "alignflow/scenario.hpp"

using namespace alignflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("alignflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ALIGNFLOW_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSteady = R"(
[scenario]
name = steady
[model]
type = primitive
alpha = 0.5
[grid]
n = 32
[rho]
preset = constant
mean = 1.0
[velocity]
preset = constant
mean = 0.3
[stepper]
t_end = 0.5
)";

const char* kInviscidBurgers = R"(
[scenario]
name = shock
[model]
type = burgers
alpha = 0.5
epsilon = 0
[grid]
n = 256
[velocity]
preset = single_mode
amplitude = 1.0
phase = 1.5707963267948966
[stepper]
t_end = 2.0
[diagnostics]
expect_blowup = true
)";

}  // namespace

TEST(Config, MinimalConfigFillsDefaults) {
  const ScenarioConfig c = parse_config("[model]\ntype = special\nalpha = 0.5\n[grid]\nn = 256\n");
  EXPECT_EQ(c.model, Formulation::special);
  EXPECT_EQ(c.n, 256u);
  EXPECT_DOUBLE_EQ(c.params.alpha, 0.5);
  EXPECT_EQ(c.stepper, StepperConfig{});
  EXPECT_EQ(c.rho.preset, "constant");
  EXPECT_DOUBLE_EQ(c.rho.mean, 1.0);
  EXPECT_EQ(c.task, Task::simulate);
}

TEST(Config, AlphaOutsideRegularityRangeRejected) {
  const auto p = problems_of("[model]\ntype = primitive\nalpha = 1.5\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_TRUE(mentions(p, "(0, 1)"));
  // the Burgers comparison model accepts it
  EXPECT_NO_THROW(parse_config("[model]\ntype = burgers\nalpha = 1.5\n[velocity]\npreset = single_mode\namplitude = 1\n"));
}

TEST(Config, ReportsEveryViolation) {
  const auto p = problems_of(
      "[model]\ntype = primitive\nalpha = 1.5\n[grid]\nn = 7\n[stepper]\ncfl_transport = 2\n"
      "[rho]\nmean = 0.2\namplitude = 0.5\n");
  EXPECT_TRUE(mentions(p, "alpha"));
  EXPECT_TRUE(mentions(p, "[grid] n"));
  EXPECT_TRUE(mentions(p, "cfl_transport"));
  EXPECT_TRUE(mentions(p, "vacuum"));
  EXPECT_GE(p.size(), 4u);

  const auto q = problems_of("[model]\ntype = flat\nspeed = 3\n[colour]\nx = 1\n[grid]\nn = many\n");
  EXPECT_TRUE(mentions(q, "type 'flat'"));
  EXPECT_TRUE(mentions(q, "unknown key 'speed'"));
  EXPECT_TRUE(mentions(q, "unknown section [colour]"));
  EXPECT_TRUE(mentions(q, "n = 'many'"));
}

TEST(Config, SyntaxErrorCarriesLineNumber) {
  const auto p = problems_of("[model]\ntype = special\nthis line has no equals sign\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_TRUE(mentions(p, "line 3")) << p[0];
  EXPECT_TRUE(mentions(problems_of("stray = 1\n[model]\ntype = special\n"), "outside any section"));
}

TEST(Config, GoldenFileRoundTrip) {
  const std::string golden = slurp(fs::path(ALIGNFLOW_TEST_DATA) / "golden.ini");
  const ScenarioConfig c = parse_config(golden);
  EXPECT_EQ(emit_config(c), golden);
  EXPECT_EQ(parse_config(emit_config(c)), c);
  ASSERT_TRUE(c.stepper.fixed_dt.has_value());
  EXPECT_DOUBLE_EQ(*c.stepper.fixed_dt, 1e-3);
  EXPECT_EQ(c.stepper.output_times.size(), 3u);
  EXPECT_FALSE(c.moc.lambda.has_value());
  EXPECT_DOUBLE_EQ(*c.moc.delta, 0.05);
}

TEST(Config, RoundTripPreservesAwkwardDoubles) {
  ScenarioConfig c;
  c.params.alpha = 0.1 + 0.2;  // not 0.3
  c.length = 1.0 / 3.0;
  c.stepper.t_end = 1e-300;
  EXPECT_EQ(parse_config(emit_config(c)), c);
}

TEST(Scenario, InitialPresets) {
  ScenarioConfig c;
  c.n = 64;
  c.rho = {"single_mode", 1.0, 0.5, 2};
  c.velocity = {"steep_front", 0.0, 0.7, 1, 0.0, 20.0};
  const SystemState s = build_initial_state(c);
  EXPECT_NEAR(s.rho.max(), 1.5, 1e-12);
  EXPECT_NEAR(s.rho.min(), 0.5, 1e-12);
  EXPECT_LE(s.u.max_abs(), 0.7 * 1.1);

  c.velocity = {"g_zero", 0.2};
  const SystemState g0 = build_initial_state(c);
  const RealField G = compute_G(g0.rho, g0.u, c.params.alpha);
  EXPECT_LT(G.max_abs(), 1e-12);
  EXPECT_NEAR(g0.u.mean(), 0.2, 1e-14);

  c.rho = {"random", 2.0, 0.5, 1, 0.0, 10.0, 6};
  const SystemState r1 = build_initial_state(c), r2 = build_initial_state(c);
  EXPECT_EQ(r1.rho.max(), r2.rho.max());
  c.seed += 1;
  EXPECT_NE(build_initial_state(c).rho.max(), r1.rho.max());
}

TEST(Scenario, SteadyStateExitsZeroWithFlatDiagnostics) {
  const ScenarioResult r = run_scenario(parse_config(kSteady));
  EXPECT_EQ(r.exit_code, exit_ok);
  EXPECT_EQ(r.run.termination, Termination::reached_t_end);
  const auto& recs = r.run.records;
  ASSERT_GT(recs.size(), 2u);
  for (const auto& rec : recs) {
    EXPECT_NEAR(rec.rho_min, 1.0, 1e-14);
    EXPECT_NEAR(rec.rho_max, 1.0, 1e-14);
    EXPECT_NEAR(rec.momentum, recs.front().momentum, 1e-13);
  }
  EXPECT_EQ(r.report["exit_code"], 0);
  EXPECT_EQ(r.report["schema"], kReportSchema);
}

TEST(Scenario, BurgersBlowupExitCodes) {
  ScenarioConfig c = parse_config(kInviscidBurgers);
  const ScenarioResult expected = run_scenario(c);
  EXPECT_EQ(expected.exit_code, exit_ok);
  ASSERT_TRUE(expected.run.blowup_time.has_value());
  EXPECT_NEAR(*expected.run.blowup_time, 1.0, 0.1);
  EXPECT_FALSE(expected.report["blowup_time"].is_null());

  c.diagnostics.expect_blowup = false;
  EXPECT_EQ(run_scenario(c).exit_code, exit_blowup);

  // a smooth run that was expected to blow up fails its check
  c.diagnostics.expect_blowup = true;
  c.stepper.t_end = 0.3;
  EXPECT_EQ(run_scenario(c).exit_code, exit_check_failed);
}

TEST(Scenario, StepLimitIsNumericalFailure) {
  ScenarioConfig c = parse_config(kSteady);
  c.stepper.max_steps = 2;
  const ScenarioResult r = run_scenario(c);
  EXPECT_EQ(r.run.termination, Termination::step_limit);
  EXPECT_EQ(r.exit_code, exit_numerical);
}

TEST(Scenario, FailedBoundCheckExitsThree) {
  ScenarioConfig c = parse_config(kSteady);
  c.velocity = {"single_mode", 0.0, 0.5};
  c.rho = {"single_mode", 1.0, 0.3};
  c.diagnostics.f_drift_tolerance = 0.0;  // any round-off drift now fails
  c.stepper.t_end = 0.2;
  const ScenarioResult r = run_scenario(c);
  EXPECT_EQ(r.run.termination, Termination::reached_t_end);
  EXPECT_EQ(r.exit_code, exit_check_failed);
  EXPECT_FALSE(r.report["checks"]["f_transport"]["passed"].get<bool>());
}

TEST(Scenario, OutputsAreDeterministicWithFixedSchema) {
  ScenarioConfig c = parse_config(kSteady);
  c.rho = {"random", 1.0, 0.3, 1, 0.0, 10.0, 4};
  c.velocity = {"random", 0.0, 0.5, 1, 0.0, 10.0, 4};
  c.n = 128;
  c.stepper.output_times = {0.0, 0.25};
  ASSERT_EQ(run_scenario(c).run.termination, Termination::reached_t_end);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  write_outputs(c, run_scenario(c), a);
  write_outputs(c, run_scenario(c), b);
  for (const char* f : {"steady_timeseries.csv", "steady_report.json", "steady_snapshots.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string ts = slurp(a / "steady_timeseries.csv");
  EXPECT_EQ(ts.substr(0, ts.find('\n')), "time,mass,momentum,rho_min,rho_max,F_min,F_max,max_dx_F,flock_amp,bkm,u_l2");
  const std::string sn = slurp(a / "steady_snapshots.csv");
  EXPECT_EQ(sn.substr(0, sn.find('\n')), "time,x,rho,u,G,F");
  EXPECT_EQ(std::count(sn.begin(), sn.end(), '\n'), 1 + 2 * 128);
}

TEST(Scenario, BreakthroughTaskReportsFeasibility) {
  const ScenarioResult r = run_scenario(parse_config(
      "[scenario]\ntask = breakthrough\n[model]\ntype = special\nalpha = 0.5\n"
      "[moc]\nrho_min = 1\ndelta = 0.3\ngamma = 0.01\n"));
  EXPECT_EQ(r.exit_code, exit_ok);
  EXPECT_LT(r.report["checks"]["breakthrough"]["worst_value"].get<double>(), 0.0);
  EXPECT_EQ(r.report["checks"]["breakthrough"]["samples"].get<int>(), 200);
  // with a tiny density the dissipation cannot win at this δ
  const ScenarioResult weak = run_scenario(parse_config(
      "[scenario]\ntask = breakthrough\n[model]\ntype = special\nalpha = 0.5\n"
      "[moc]\nrho_min = 1e-3\ndelta = 0.3\ngamma = 0.01\n"));
  EXPECT_EQ(weak.exit_code, exit_check_failed);
}

TEST(Sweep, GridSpecParsing) {
  const auto axes = parse_grid_spec("model.alpha=0.3,0.5; grid.n = 64");
  ASSERT_EQ(axes.size(), 2u);
  EXPECT_EQ(axes[0].values.size(), 2u);
  EXPECT_EQ(axes[1].values[0], "64");
  EXPECT_THROW(parse_grid_spec("alpha=0.3"), ConfigError);
  EXPECT_THROW(parse_grid_spec("model.speed=1"), ConfigError);
  EXPECT_THROW(parse_grid_spec(""), ConfigError);
}

TEST(Sweep, SinglePointMatchesRunScenario) {
  const RawConfig base = parse_raw_config(kSteady);
  const SweepSummary s = sweep(base, parse_grid_spec("model.alpha=0.5"), 2);
  ASSERT_EQ(s.rows.size(), 1u);
  ScenarioConfig direct = config_from_raw(base);
  direct.name = "steady_row0";
  const ScenarioResult r = run_scenario(direct);
  EXPECT_EQ(s.rows[0].exit_code, r.exit_code);
  EXPECT_EQ(timeseries_csv(s.rows[0].result->run.records), timeseries_csv(r.run.records));
}

TEST(Sweep, AlphaByResolutionRowsInGridOrder) {
  RawConfig base = parse_raw_config(kSteady);
  base["rho"] = {{"preset", "single_mode"}, {"mean", "1"}, {"amplitude", "0.3"}};
  base["velocity"] = {{"preset", "single_mode"}, {"amplitude", "0.5"}, {"phase", "1.5707963267948966"}};
  base["stepper"]["t_end"] = "0.3";
  base["diagnostics"]["f_drift_tolerance"] = "1e-4";
  const SweepSummary s = sweep(base, parse_grid_spec("model.alpha=0.3,0.5,0.7;grid.n=64,128"), 3);
  ASSERT_EQ(s.rows.size(), 6u);
  EXPECT_EQ(s.exit_code, exit_ok);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(s.rows[i].values[0], std::vector<std::string>({"0.3", "0.5", "0.7"})[i / 2]);
    EXPECT_EQ(s.rows[i].values[1], i % 2 ? "128" : "64");
    ASSERT_TRUE(s.rows[i].result.has_value());
    EXPECT_EQ(s.rows[i].result->run.termination, Termination::reached_t_end);
  }
  const std::string csv = sweep_csv(s);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  // row order is independent of the worker count
  EXPECT_EQ(sweep_csv(sweep(base, parse_grid_spec("model.alpha=0.3,0.5,0.7;grid.n=64,128"), 1)), csv);
}

TEST(Sweep, ExitsNonzeroOnlyWhenEveryRowFails) {
  const RawConfig base = parse_raw_config(kSteady);
  const SweepSummary mixed = sweep(base, parse_grid_spec("model.alpha=0.5,1.5"), 1);
  EXPECT_EQ(mixed.rows[1].exit_code, exit_usage);
  EXPECT_EQ(mixed.exit_code, exit_ok);
  const SweepSummary bad = sweep(base, parse_grid_spec("model.alpha=1.5,2.5"), 1);
  EXPECT_NE(bad.exit_code, exit_ok);
}

TEST(Cli, ExitCodeContract) {
  const fs::path dir = scratch("cli");
  const fs::path good = dir / "steady.ini";
  std::ofstream(good) << kSteady;
  const fs::path shock = dir / "shock.ini";
  std::ofstream(shock) << kInviscidBurgers;
  const fs::path bad = dir / "bad.ini";
  std::ofstream(bad) << "[model]\ntype = primitive\nalpha = 1.5\n";
  const std::string out = " --output-dir " + (dir / "out").string();

  EXPECT_EQ(run_cli("selftest"), exit_ok);
  EXPECT_EQ(run_cli("run " + good.string() + out), exit_ok);
  EXPECT_TRUE(fs::exists(dir / "out" / "steady_timeseries.csv"));
  EXPECT_EQ(run_cli("run " + shock.string() + out), exit_ok);
  EXPECT_EQ(run_cli("run " + bad.string() + out), exit_usage);
  EXPECT_EQ(run_cli("run " + (dir / "missing.ini").string()), exit_io);
  EXPECT_EQ(run_cli("frobnicate"), exit_usage);
  // output directory blocked by a regular file
  std::ofstream(dir / "blocker") << "x";
  EXPECT_EQ(run_cli("run " + good.string() + " --output-dir " + (dir / "blocker" / "sub").string()), exit_io);
  EXPECT_EQ(run_cli("sweep " + good.string() + " --grid model.alpha=0.3,0.5 --quiet" + out), exit_ok);
  EXPECT_TRUE(fs::exists(dir / "out" / "steady_sweep.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "steady_row1_report.json"));
  EXPECT_EQ(run_cli("run " + good.string() + " --record-every 5 --quiet" + out), exit_ok);
}
