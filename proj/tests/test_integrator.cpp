#include <gtest/gtest.h>

#include <cmath>

#include "alignflow/integrator.hpp"
#include "test_support.hpp"

using namespace alignflow;
using alignflow::test::kTwoPi;

namespace {

RealField bump(const SpectralGrid& g, double eps = 0.5) {
  return RealField::sample(g, [=](double x) { return 1.0 + eps * std::cos(x); });
}

RealField sine(const SpectralGrid& g, double a = 1.0) {
  return RealField::sample(g, [=](double x) { return a * std::sin(x); });
}

}  // namespace

TEST(StepperConfig, Validation) {
  StepperConfig c;
  EXPECT_NO_THROW(c.validate());
  c.cfl_transport = 1.5;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.tail_fraction_threshold = 1.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = {};
  c.record_every = 0;
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(ComputeDt, DissipativeBound) {
  SpectralGrid g(96);
  ModelParams p;
  StepperConfig cfg;
  const double kmax = g.max_retained_wavenumber();
  auto s1 = make_primitive_state(RealField(g, 1.0), RealField(g));
  EXPECT_NEAR(compute_dt(s1, p, cfg), cfg.cfl_dissipation / std::pow(kmax, p.alpha), 1e-15);
  auto s2 = make_primitive_state(RealField(g, 2.0), RealField(g));
  EXPECT_NEAR(compute_dt(s2, p, cfg), 0.5 * compute_dt(s1, p, cfg), 1e-15);

  // transport-limited for a fast flow
  auto s3 = make_primitive_state(RealField(g, 1.0), RealField(g, 100.0));
  EXPECT_NEAR(compute_dt(s3, p, cfg), cfg.cfl_transport * g.spacing() / 100.0, 1e-15);

  // inviscid Burgers has no dissipative limit
  auto b = make_burgers_state(sine(g));
  p.epsilon_burgers = 0.0;
  EXPECT_NEAR(compute_dt(b, p, cfg), cfg.cfl_transport * g.spacing() / b.u.max_abs(), 1e-15);
}

TEST(StepRk4, SteadyStateUnchanged) {
  SpectralGrid g(32);
  ModelParams p;
  auto s = make_primitive_state(RealField(g, 1.2), RealField(g, 0.3));
  auto t = step_rk4(s, p, 0.01);
  EXPECT_LT(test::max_abs_diff(t.rho, s.rho), 1e-15);
  EXPECT_LT(test::max_abs_diff(t.u, s.u), 1e-15);
  EXPECT_DOUBLE_EQ(t.time, 0.01);
}

TEST(StepRk4, OneStepConservation) {
  SpectralGrid g(128);
  ModelParams p;
  StepperConfig cfg;
  for (std::uint32_t seed = 0; seed < 3; ++seed) {
    auto s = make_primitive_state(test::random_density(g, 20, seed), test::random_band_limited(g, 20, seed + 3, 0.4));
    auto t = step_rk4(s, p, compute_dt(s, p, cfg));
    EXPECT_LE(std::abs(mass(t.rho) - mass(s.rho)), 1e-14 * mass(s.rho));
    EXPECT_LE(std::abs(momentum(t.rho, t.u) - s.momentum0), 1e-12 * std::max(1.0, std::abs(s.momentum0)));
    // without the projection the drift is a small O(dt^5) residue
    auto raw = step_rk4(s, p, compute_dt(s, p, cfg), false);
    const double raw_drift = std::abs(momentum(raw.rho, raw.u) - s.momentum0);
    EXPECT_LE(raw_drift, 1e-6);
    EXPECT_LE(test::max_abs_diff(raw.u, t.u), 2.0 * raw_drift / mass(s.rho));

    auto q = to_reformulated(s, p.alpha);
    auto r = step_rk4(q, p, compute_dt(q, p, cfg));
    EXPECT_LE(std::abs(mass(r.rho) - mass(q.rho)), 1e-14 * mass(q.rho));
    EXPECT_LE(std::abs(r.G.mean()), 1e-15);
  }
}

// Fixed-horizon errors with dt, dt/2, dt/4 give (e1 - e2)/(e2 - e4) → 16.
TEST(StepRk4, FourthOrderRichardsonRatio) {
  SpectralGrid g(64);
  ModelParams p;
  auto s = make_reformulated_state(bump(g, 0.3), sine(g, 0.2), p.alpha);
  auto integrate = [&](int steps) {
    SystemState x = s;
    const double dt = 0.4 / steps;
    for (int i = 0; i < steps; ++i) x = step_rk4(x, p, dt);
    return x.rho;
  };
  auto a = integrate(8), b = integrate(16), c = integrate(32);
  const double ratio = test::max_abs_diff(a, b) / test::max_abs_diff(b, c);
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(Run, SteadyStateReachesEnd) {
  SpectralGrid g(32);
  ModelParams p;
  StepperConfig cfg;
  cfg.t_end = 1.0;
  auto res = run(make_primitive_state(RealField(g, 1.0), RealField(g, 0.2)), p, cfg);
  EXPECT_EQ(res.termination, Termination::reached_t_end);
  EXPECT_EQ(res.bkm_integral, 0.0);
  EXPECT_NEAR(res.final_state.time, 1.0, 1e-14);
  EXPECT_EQ(res.records.front().time, 0.0);
  EXPECT_NEAR(res.records.back().time, 1.0, 1e-14);
}

TEST(Run, RecordsAndSnapshotsLandOnRequestedTimes) {
  SpectralGrid g(64);
  ModelParams p;
  StepperConfig cfg;
  cfg.t_end = 0.5;
  cfg.record_every = 5;
  cfg.output_times = {0.0, 0.25, 0.5};
  std::size_t calls = 0;
  auto res = run(make_special_state(bump(g), p.alpha), p, cfg, [&](const SystemState&, std::size_t) { ++calls; });
  EXPECT_EQ(calls, res.steps);
  ASSERT_EQ(res.snapshots.size(), 3u);
  EXPECT_EQ(res.snapshots[1].time, 0.25);
  EXPECT_EQ(res.snapshots[2].time, 0.5);
  EXPECT_EQ(res.records.size(), 1 + res.steps / 5 + (res.steps % 5 ? 1 : 0));
  for (std::size_t i = 1; i < res.records.size(); ++i) {
    EXPECT_GE(res.records[i].bkm_partial, res.records[i - 1].bkm_partial);
    EXPECT_GT(res.records[i].time, res.records[i - 1].time);
  }
}

TEST(Run, StepLimit) {
  SpectralGrid g(32);
  ModelParams p;
  StepperConfig cfg;
  cfg.max_steps = 3;
  cfg.t_end = 10.0;
  auto res = run(make_special_state(bump(g), p.alpha), p, cfg);
  EXPECT_EQ(res.termination, Termination::step_limit);
  EXPECT_EQ(res.steps, 3u);
}

TEST(Run, InviscidBurgersBlowsUpNearOne) {
  SpectralGrid g(1024);
  ModelParams p;
  p.alpha = 0.5;
  p.epsilon_burgers = 0.0;
  StepperConfig cfg;
  cfg.t_end = 2.0;
  cfg.record_every = 50;
  auto res = run(make_burgers_state(sine(g)), p, cfg);
  ASSERT_EQ(res.termination, Termination::blowup_detected);
  ASSERT_TRUE(res.blowup_time.has_value());
  EXPECT_GE(*res.blowup_time, 0.9);
  EXPECT_LE(*res.blowup_time, 1.05);
}

TEST(Run, VacuumIsReportedNotThrown) {
  SpectralGrid g(64);
  ModelParams p;
  StepperConfig cfg;
  cfg.t_end = 5.0;
  // strong compression with G far from zero empties the domain quickly
  auto s = make_primitive_state(RealField(g, 1.0), sine(g, -40.0));
  auto res = run(s, p, cfg);
  EXPECT_NE(res.termination, Termination::reached_t_end);
}

TEST(Run, Deterministic) {
  SpectralGrid g(64);
  ModelParams p;
  StepperConfig cfg;
  cfg.t_end = 0.3;
  auto s = make_reformulated_state(bump(g), sine(g, 0.3), p.alpha);
  auto a = run(s, p, cfg), b = run(s, p, cfg);
  EXPECT_EQ(a.steps, b.steps);
  EXPECT_EQ(test::max_abs_diff(a.final_state.rho, b.final_state.rho), 0.0);
}
