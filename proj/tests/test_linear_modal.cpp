#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "attractor_lab/linear_modal.hpp"
#include "attractor_lab/wave_system.hpp"
#include "test_util.hpp"

using namespace attractor_lab;
using attractor_lab::testing::random_point;

namespace {

LinearModalConfig modal(double l, std::size_t n) { return {l, MetricSpec::interval(n)}; }

// RK4 reference with the same linear reduction: k = f = K = h = 0.
WaveSystemConfig linear_wave(double l, std::size_t n, double dt) {
  WaveSystemConfig c;
  c.l = l;
  c.mode_count = n;
  c.dt = dt;
  return c;
}

}  // namespace

TEST(LinearModal, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(1);
  const auto x = random_point(rng, 4);
  EXPECT_EQ(linear_modal_evolve(x, modal(1.0, 4), 0.0), x);
}

TEST(LinearModal, CriticalDampingRepeatedRoot) {
  const auto y = linear_modal_evolve(PhasePoint({1.0}, {0.0}), modal(2.0, 1), 1.0);
  EXPECT_NEAR(y.position()[0], 2.0 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(y.velocity()[0], -std::exp(-1.0), 1e-15);  // d/dt (1+t)e^{-t} = -t e^{-t}
}

TEST(LinearModal, UnderdampedEnvelopeRateIsHalf) {
  const auto cfg = modal(1.0, 1);
  EXPECT_DOUBLE_EQ(linear_modal_envelope_rate(cfg), 0.5);
  const PhasePoint x0({1.0}, {0.0});
  double lo = INFINITY, hi = 0.0;
  for (double t = 0.0; t <= 40.0; t += 0.05) {
    const double r = phase_norm(linear_modal_evolve(x0, cfg, t), cfg.metric) * std::exp(0.5 * t);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  // Envelope-compensated norm neither grows nor decays.
  EXPECT_GT(lo, 0.3);
  EXPECT_LT(hi, 2.0);
}

TEST(LinearModal, EnvelopeRateSaturatesAndOverdamps) {
  EXPECT_DOUBLE_EQ(linear_modal_envelope_rate(modal(2.0, 3)), 1.0);
  // l = 5, lambda = 1: slow root (5 - sqrt 21)/2.
  EXPECT_NEAR(linear_modal_envelope_rate(modal(5.0, 3)), 0.5 * (5.0 - std::sqrt(21.0)), 1e-15);
}

TEST(LinearModal, SemigroupPropertyToRoundoff) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ut(0.0, 5.0);
  for (double l : {0.3, 1.0, 2.0, 5.0, 40.0}) {
    const auto cfg = modal(l, 8);
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = random_point(rng, 8, 2.0);
      const double t = ut(rng), s = ut(rng);
      const auto once = linear_modal_evolve(x, cfg, t + s);
      const auto twice = linear_modal_evolve(linear_modal_evolve(x, cfg, t), cfg, s);
      const double scale = std::max(1e-300, phase_norm(x, cfg.metric));
      EXPECT_LE(phase_distance(once, twice, cfg.metric), 1e-12 * scale) << "l=" << l;
    }
  }
}

TEST(LinearModal, AgreesWithRk4OnAllRootBranches) {
  std::mt19937_64 rng(3);
  // N = 2 covers: l=1 complex roots; l=2 repeated (mode 1); l=5 distinct real.
  for (double l : {1.0, 2.0, 5.0}) {
    const auto x = random_point(rng, 2, 1.0);
    const auto exact = linear_modal_evolve(x, modal(l, 2), 3.0);
    const auto rk = WaveSemigroup(linear_wave(l, 2, 0.005)).advance(x, 3.0);
    EXPECT_LE(phase_distance(exact, rk, MetricSpec::interval(2)), 1e-8) << "l=" << l;
  }
}

TEST(LinearModal, SemigroupWrapper) {
  LinearModalSemigroup sg(modal(1.0, 3));
  EXPECT_EQ(sg.time_quantum(), 0.0);
  EXPECT_EQ(sg.metric().mode_count(), 3u);
  EXPECT_THROW(LinearModalSemigroup(modal(0.0, 3)), ConfigError);
  EXPECT_THROW(sg.advance(PhasePoint::zero(2), 1.0), DimensionError);
  EXPECT_THROW(sg.advance(PhasePoint::zero(3), -1.0), ConfigError);
}
