#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "error.hpp"
#include "phase_space.hpp"

namespace attractor_lab {

// z_tt - Laplace z + l z_t = 0, mode by mode.
struct LinearModalConfig {
  double damping = 1.0;
  MetricSpec metric = MetricSpec::interval(1);

  void validate() const {
    if (!(damping > 0.0) || !std::isfinite(damping))
      throw ConfigError("LinearModalConfig: damping l must be positive");
  }
};

namespace detail {

// Exact flow of z'' + l z' + lambda z = 0 from (z0, v0) over time t.
inline void damped_mode(double l, double lambda, double z0, double v0, double t, double& z,
                        double& v) {
  const double disc = l * l - 4.0 * lambda;
  const double sigma = -0.5 * l;
  const double scale = l * l + 4.0 * lambda;
  if (std::abs(disc) <= 1e-14 * scale) {
    // repeated root sigma: z = e^{sigma t}(z0 + (v0 - sigma z0) t)
    const double c = v0 - sigma * z0;
    const double e = std::exp(sigma * t);
    z = e * (z0 + c * t);
    v = e * (sigma * (z0 + c * t) + c);
  } else if (disc < 0.0) {
    const double w = 0.5 * std::sqrt(-disc);
    const double c = (v0 - sigma * z0) / w;
    const double e = std::exp(sigma * t);
    const double cs = std::cos(w * t);
    const double sn = std::sin(w * t);
    z = e * (z0 * cs + c * sn);
    v = e * (sigma * (z0 * cs + c * sn) + w * (-z0 * sn + c * cs));
  } else {
    const double sq = std::sqrt(disc);
    // r1 = (-l + sq)/2 computed without cancellation via r1 * r2 = lambda.
    const double r2 = 0.5 * (-l - sq);
    const double r1 = lambda / r2;
    const double c1 = (v0 - r2 * z0) / (r1 - r2);
    const double c2 = (r1 * z0 - v0) / (r1 - r2);
    const double e1 = std::exp(r1 * t);
    const double e2 = std::exp(r2 * t);
    z = c1 * e1 + c2 * e2;
    v = c1 * r1 * e1 + c2 * r2 * e2;
  }
}

}  // namespace detail

// Closed-form solution operator; exact up to roundoff.
inline PhasePoint linear_modal_evolve(const PhasePoint& initial, const LinearModalConfig& cfg,
                                      double t) {
  cfg.validate();
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("linear_modal_evolve: t must be >= 0");
  const std::size_t n = cfg.metric.mode_count();
  if (initial.mode_count() != n) throw DimensionError("linear_modal_evolve: mode mismatch");
  if (t == 0.0) return initial;
  std::vector<double> a(n), b(n);
  for (std::size_t j = 0; j < n; ++j)
    detail::damped_mode(cfg.damping, cfg.metric.lambda(j), initial.position()[j],
                        initial.velocity()[j], t, a[j], b[j]);
  return PhasePoint(std::move(a), std::move(b));
}

// Slowest modal envelope rate: min_j of -Re(dominant characteristic root).
inline double linear_modal_envelope_rate(const LinearModalConfig& cfg) {
  double rate = INFINITY;
  for (double lam : cfg.metric.eigenvalues()) {
    const double disc = cfg.damping * cfg.damping - 4.0 * lam;
    const double r = disc <= 0.0 ? 0.5 * cfg.damping : 0.5 * (cfg.damping - std::sqrt(disc));
    rate = std::min(rate, r);
  }
  return rate;
}

// Exact semigroup wrapper usable wherever a Semigroup is expected.
class LinearModalSemigroup {
 public:
  explicit LinearModalSemigroup(LinearModalConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  PhasePoint advance(const PhasePoint& x, double t) const { return linear_modal_evolve(x, cfg_, t); }
  const MetricSpec& metric() const noexcept { return cfg_.metric; }
  // Exact flow: any time increment is admissible.
  double time_quantum() const noexcept { return 0.0; }
  const LinearModalConfig& config() const noexcept { return cfg_; }

 private:
  LinearModalConfig cfg_;
};

}  // namespace attractor_lab
