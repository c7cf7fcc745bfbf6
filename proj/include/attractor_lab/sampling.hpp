#pragma once

// Seeded sampling that gives the same numbers on every platform.
//
// std::uniform_real_distribution and std::normal_distribution are
// implementation-defined, so they are avoided. The generator is
// std::mt19937_64 (fully specified by the standard); uniforms take the top
// 53 bits of each draw, and normals come from the Box-Muller transform.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "error.hpp"
#include "phase_space.hpp"

namespace attractor_lab {

class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// One point uniform in the phase ball {x : |x| <= radius}, restricted to the
/// first `active` modes (0 means all). In the coordinates (sqrt(lambda) a, b)
/// the ball is Euclidean, so a Gaussian direction scaled by r U^(1/d) is uniform.
inline PhasePoint sample_phase_ball_point(PortableRng& rng, const MetricSpec& m, double radius,
                                          std::size_t active = 0) {
  const std::size_t n = m.mode_count();
  if (active == 0 || active > n) active = n;
  const std::size_t dim = 2 * active;
  std::vector<double> g(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& v : g) {
      v = rng.normal();
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double r = radius * std::pow(rng.uniform(), 1.0 / double(dim)) / std::sqrt(norm2);
  std::vector<double> a(n, 0.0), b(n, 0.0);
  for (std::size_t j = 0; j < active; ++j) {
    a[j] = r * g[j] / std::sqrt(m.lambda(j));
    b[j] = r * g[active + j];
  }
  return PhasePoint(std::move(a), std::move(b));
}

struct EnsembleSpec {
  std::size_t points = 20;
  double radius = 1.0;
  std::uint64_t seed = 1;
  std::size_t active_modes = 0;  // 0: all modes
  // > 0 adds, after each point, a partner displaced by up to pair_jitter *
  // radius, so that closely spaced pairs exist in high dimension.
  double pair_jitter = 0.0;

  void validate() const {
    if (points < 1) throw ConfigError("ensemble points must be >= 1");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ConfigError("ensemble radius must be >= 0");
    if (!(pair_jitter >= 0.0) || !std::isfinite(pair_jitter)) throw ConfigError("pair_jitter must be >= 0");
  }
};

inline Ensemble sample_ensemble(const EnsembleSpec& spec, const MetricSpec& m, std::string label = {}) {
  spec.validate();
  PortableRng rng(spec.seed);
  std::vector<PhasePoint> pts;
  for (std::size_t i = 0; i < spec.points; ++i) {
    pts.push_back(sample_phase_ball_point(rng, m, spec.radius, spec.active_modes));
    if (spec.pair_jitter > 0.0)
      pts.push_back(pts.back() + sample_phase_ball_point(rng, m, spec.pair_jitter * spec.radius, spec.active_modes));
  }
  return Ensemble(std::move(pts), std::move(label));
}

}  // namespace attractor_lab
