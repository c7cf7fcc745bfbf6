#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "attractor_lab/linear_modal.hpp"
#include "attractor_lab/semigroup.hpp"
#include "attractor_lab/wave_system.hpp"
#include "test_util.hpp"

using namespace attractor_lab;
using attractor_lab::testing::random_ensemble;
using attractor_lab::testing::random_point;
using attractor_lab::testing::ScalingSemigroup;

static_assert(Semigroup<LinearModalSemigroup>);
static_assert(Semigroup<WaveSemigroup>);

namespace {

LinearModalSemigroup linear(double l, std::size_t n) { return LinearModalSemigroup({l, MetricSpec::interval(n)}); }

WaveSystemConfig forced_wave(std::size_t n) {
  WaveSystemConfig c;
  c.mode_count = n;
  c.dt = 0.01;
  c.k = 1.0;
  c.p = 2.0;
  c.l = 1.0;
  c.f_coeffs = {0.0, -1.0, 0.0, 1.0};
  c.h_coeffs = {2.0};
  return c;
}

}  // namespace

TEST(SampleOrbit, IncludesHorizonAndRejectsBadCadence) {
  const auto sg = linear(1.0, 2);
  const auto o = sample_orbit(sg, PhasePoint({1, 0}, {0, 0}), 1.05, 0.25);
  ASSERT_EQ(o.size(), 6u);
  EXPECT_EQ(o.front().first, 0.0);
  EXPECT_EQ(o.back().first, 1.05);
  EXPECT_THROW(sample_orbit(sg, PhasePoint::zero(2), 1.0, 0.0), ConfigError);
  const WaveSemigroup wave(forced_wave(4));
  EXPECT_THROW(sample_orbit(wave, PhasePoint::zero(4), 1.0, 0.015), ConfigError);
}

TEST(SampleOrbit, RepeatedAdvanceMatchesDirectEvolve) {
  const WaveSemigroup sg(forced_wave(6));
  std::mt19937_64 rng(3);
  const auto x = random_point(rng, 6);
  const auto o = sample_orbit(sg, x, 2.0, 0.5);
  const auto rec = evolve(x, sg.config(), 2.0, 0.5);
  ASSERT_EQ(o.size(), rec.samples.size());
  for (std::size_t i = 0; i < o.size(); ++i) EXPECT_EQ(o[i].second, rec.samples[i].second);
}

TEST(EvolveEnsemble, ParallelMatchesSequential) {
  const WaveSemigroup sg(forced_wave(6));
  std::mt19937_64 rng(4);
  const auto e = random_ensemble(rng, 9, 6);
  const auto par = evolve_ensemble(sg, e, 1.5);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_EQ(par[i], sg.advance(e[i], 1.5));
}

TEST(AbsorbingRadius, LinearDampedProbeShrinksToFloor) {
  const auto sg = linear(1.0, 4);
  const Ensemble probe({PhasePoint({5.0, 0, 0, 0}, {0, 0, 0, 0})});
  const auto rep = absorbing_radius(sg, probe, 60.0, 10.0, 0.5);
  EXPECT_LT(rep.radius, 1.1 * 5.0 * std::exp(-0.5 * 60.0) * 3.0);
  EXPECT_TRUE(std::isfinite(rep.entering_times[0]));
}

TEST(AbsorbingRadius, ProbeAlreadyInsideEntersAtZero) {
  const auto sg = linear(1.0, 3);
  std::mt19937_64 rng(5);
  const auto probe = random_ensemble(rng, 6, 3, 0.1);
  const auto rep = absorbing_radius(sg, probe, 0.01, 0.5, 0.01);
  for (double t : rep.entering_times) EXPECT_EQ(t, 0.0);
}

TEST(AbsorbingRadius, FarProbeEntersNoEarlier) {
  const auto sg = linear(1.0, 2);
  const Ensemble probe({PhasePoint({10.0, 0}, {0, 0}), PhasePoint({0.5, 0}, {0, 0})});
  const auto rep = absorbing_radius(sg, probe, 5.0, 5.0, 0.1);
  EXPECT_GE(rep.entering_times[0], rep.entering_times[1]);
  EXPECT_EQ(rep.max_entering_time(), rep.entering_times[0]);
}

TEST(AbsorbingRadius, GrowingFlowIsRejected) {
  const ScalingSemigroup sg{MetricSpec::interval(1), 0.3};
  EXPECT_THROW(absorbing_radius(sg, Ensemble({PhasePoint({1.0}, {0.0})}), 1.0, 4.0, 0.1), NumericalError);
  EXPECT_THROW(absorbing_radius(sg, Ensemble({PhasePoint({1.0}, {0.0})}), 0.0, 4.0, 0.1), ConfigError);
}

TEST(AbsorbingRadius, ForcedWaveBallIsPositivelyInvariant) {
  const WaveSemigroup sg(forced_wave(8));
  std::mt19937_64 rng(6);
  const auto probe = random_ensemble(rng, 8, 8, 3.0);
  const auto rep = absorbing_radius(sg, probe, 10.0, 10.0, 0.1);
  EXPECT_GT(rep.radius, 0.0);
  // Continue every orbit twice as long; once inside R0 it must stay inside.
  const auto orbits = sample_orbits(sg, probe, 40.0, 0.1);
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    bool inside = false;
    for (const auto& [t, x] : orbits[i]) {
      const double r = phase_norm(x, sg.metric());
      if (inside) {
        EXPECT_LE(r, rep.radius * (1 + 1e-3)) << "point " << i << " t=" << t;
      }
      inside = inside || (t >= rep.entering_times[i] - 1e-12);
    }
  }
}

TEST(AbsorbingRadius, LinearBallIsPositivelyInvariant) {
  const auto sg = linear(0.4, 5);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_point(rng, 5, 2.0);
    const double r0 = phase_norm(x, sg.metric());
    for (const auto& [t, y] : sample_orbit(sg, x, 20.0, 0.05))
      EXPECT_LE(phase_norm(y, sg.metric()), r0 * (1 + 1e-12));
  }
}

TEST(EnteringTime, StaysInsideSemantics) {
  const MetricSpec m = MetricSpec::interval(1);
  Orbit o{{0.0, PhasePoint({0.0}, {3.0})}, {1.0, PhasePoint({0.0}, {0.5})},
          {2.0, PhasePoint({0.0}, {2.0})}, {3.0, PhasePoint({0.0}, {0.5})}};
  EXPECT_EQ(entering_time(o, m, 1.0), 3.0);
  EXPECT_EQ(entering_time(o, m, 5.0), 0.0);
  EXPECT_TRUE(std::isinf(entering_time(o, m, 0.1)));
}
