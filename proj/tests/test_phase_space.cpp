#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "attractor_lab/decay_law.hpp"
#include "attractor_lab/phase_space.hpp"
#include "test_util.hpp"

using namespace attractor_lab;
using attractor_lab::testing::random_point;

TEST(PhaseDistance, IdentityIsZero) {
  std::mt19937_64 rng(1);
  const auto m = MetricSpec::interval(5);
  const auto x = random_point(rng, 5);
  EXPECT_EQ(phase_distance(x, x, m), 0.0);
}

TEST(PhaseDistance, SingleModeH1Norm) {
  const auto m = MetricSpec::interval(1);
  EXPECT_DOUBLE_EQ(phase_distance(PhasePoint({1.0}, {0.0}), PhasePoint({0.0}, {0.0}), m), 1.0);
}

TEST(PhaseDistance, SecondModeWeightedByFour) {
  const auto m = MetricSpec::interval(2);
  EXPECT_DOUBLE_EQ(phase_distance(PhasePoint({0.0, 1.0}, {0.0, 0.0}), PhasePoint::zero(2), m), 2.0);
}

TEST(PhaseDistance, DimensionMismatchThrows) {
  const auto m = MetricSpec::interval(2);
  EXPECT_THROW(phase_distance(PhasePoint({1.0}, {0.0}), PhasePoint::zero(2), m), DimensionError);
  EXPECT_THROW(phase_distance(PhasePoint::zero(3), PhasePoint::zero(3), m), DimensionError);
}

TEST(PhasePoint, RejectsNonFiniteAndRagged) {
  EXPECT_THROW(PhasePoint({NAN}, {0.0}), ConfigError);
  EXPECT_THROW(PhasePoint({1.0}, {INFINITY}), ConfigError);
  EXPECT_THROW(PhasePoint({1.0, 2.0}, {0.0}), DimensionError);
  EXPECT_THROW(PhasePoint({}, {}), DimensionError);
}

TEST(PhaseDistance, TriangleInequalityOnRandomTriples) {
  std::mt19937_64 rng(7);
  const auto m = MetricSpec::interval(8);
  for (int trial = 0; trial < 500; ++trial) {
    const auto x = random_point(rng, 8, 3.0);
    const auto y = random_point(rng, 8, 3.0);
    const auto z = random_point(rng, 8, 3.0);
    const double lhs = phase_distance(x, z, m);
    const double rhs = phase_distance(x, y, m) + phase_distance(y, z, m);
    EXPECT_LE(lhs, rhs * (1.0 + 1e-12));
    EXPECT_DOUBLE_EQ(phase_distance(x, y, m), phase_distance(y, x, m));
  }
}

TEST(PhaseDistance, InvariantUnderConsistentModeRelabeling) {
  std::mt19937_64 rng(11);
  const auto m = MetricSpec::interval(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_point(rng, 6, 2.0);
    const auto y = random_point(rng, 6, 2.0);
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto permute = [&](const std::vector<double>& v) {
      std::vector<double> out(v.size());
      for (std::size_t j = 0; j < v.size(); ++j) out[j] = v[perm[j]];
      return out;
    };
    const PhasePoint px(permute(x.position()), permute(x.velocity()));
    const PhasePoint py(permute(y.position()), permute(y.velocity()));
    const auto w = permute(m.eigenvalues());
    EXPECT_NEAR(weighted_phase_distance(px, py, w), phase_distance(x, y, m), 1e-12);
  }
}

TEST(MetricSpec, IntervalEigenvalues) {
  const auto m = MetricSpec::interval(4);
  EXPECT_EQ(m.lambda1(), 1.0);
  EXPECT_EQ(m.eigenvalues(), (std::vector<double>{1, 4, 9, 16}));
}

TEST(MetricSpec, RectangleEigenvaluesSorted) {
  const auto m = MetricSpec::rectangle(5);
  EXPECT_EQ(m.eigenvalues(), (std::vector<double>{2, 5, 5, 8, 10}));
  EXPECT_EQ(m.spatial_dim(), 2);
}

TEST(MetricSpec, RejectsBadEigenvalues) {
  EXPECT_THROW(MetricSpec({}), ConfigError);
  EXPECT_THROW(MetricSpec({1.0, 0.5}), ConfigError);
  EXPECT_THROW(MetricSpec({0.0}), ConfigError);
}

TEST(EnsembleRadius, Examples) {
  const auto m = MetricSpec::interval(1);
  EXPECT_EQ(ensemble_radius(Ensemble({PhasePoint::zero(1)}), m), 0.0);
  EXPECT_DOUBLE_EQ(ensemble_radius(Ensemble({PhasePoint({1.0}, {0.0}), PhasePoint({0.0}, {3.0})}), m), 3.0);
}

TEST(EnsembleRadius, MatchesBruteForceMax) {
  std::mt19937_64 rng(3);
  const auto m = MetricSpec::interval(4);
  std::vector<PhasePoint> pts;
  double expect = 0.0;
  for (int i = 0; i < 5; ++i) {
    pts.push_back(random_point(rng, 4, 2.0));
    double s = 0.0;
    for (std::size_t j = 0; j < 4; ++j)
      s += double((j + 1) * (j + 1)) * std::pow(pts.back().position()[j], 2) + std::pow(pts.back().velocity()[j], 2);
    expect = std::max(expect, std::sqrt(s));
  }
  EXPECT_NEAR(ensemble_radius(Ensemble(pts), m), expect, 1e-14);
}

TEST(Ensemble, RejectsEmptyAndMixed) {
  EXPECT_THROW(Ensemble({}), ConfigError);
  EXPECT_THROW(Ensemble({PhasePoint::zero(1), PhasePoint::zero(2)}), DimensionError);
}

TEST(DecayLaw, Examples) {
  EXPECT_DOUBLE_EQ(DecayLaw::exponential(1.0, 0.5).eval(0.0), 1.0);
  EXPECT_NEAR(DecayLaw::exponential(1.0, 0.5).eval(2.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(DecayLaw::exponential(1.0, 0.5).eval(2.0), 0.3679, 5e-5);
  EXPECT_DOUBLE_EQ(DecayLaw::polynomial(2.0, 1.0).eval(4.0), 0.5);
}

TEST(DecayLaw, DomainErrors) {
  EXPECT_THROW(DecayLaw::log_polynomial(1.0, 1.0).eval(1.0), DomainError);
  EXPECT_THROW(DecayLaw::log_polynomial(1.0, 1.0).eval(0.5), DomainError);
  EXPECT_THROW(DecayLaw::polynomial(1.0, 1.0).eval(0.0), DomainError);
  EXPECT_NO_THROW(DecayLaw::log_polynomial(1.0, 1.0).eval(1.0001));
  EXPECT_THROW(DecayLaw::exponential(0.0, 1.0), ConfigError);
  EXPECT_THROW(DecayLaw::exponential(1.0, -1.0), ConfigError);
}

TEST(DecayLaw, StrictlyDecreasingForAllKinds) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(1.01, 100.0);
  for (auto law : {DecayLaw::exponential(3.0, 0.7), DecayLaw::polynomial(2.0, 1.5),
                   DecayLaw::log_polynomial(1.0, 2.0), DecayLaw(DecayKind::polynomial, 1.0, 0.3, 2.0)}) {
    for (int i = 0; i < 200; ++i) {
      double t1 = u(rng) + law.shift(), t2 = u(rng) + law.shift();
      if (t1 == t2) continue;
      if (t1 > t2) std::swap(t1, t2);
      EXPECT_LT(law.eval(t2), law.eval(t1)) << to_string(law.kind());
    }
  }
}

TEST(DecayLaw, InverseRoundTrips) {
  for (auto law : {DecayLaw::exponential(3.0, 0.7), DecayLaw::polynomial(2.0, 1.5),
                   DecayLaw::log_polynomial(1.0, 2.0)}) {
    for (double t : {1.5, 3.0, 10.0, 40.0}) EXPECT_NEAR(law.inverse(law.eval(t)), t, 1e-9 * t);
  }
}
