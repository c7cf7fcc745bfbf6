#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"
#include "phase_space.hpp"

namespace attractor_lab {

// A solution operator S(t) on Galerkin phase space. time_quantum() is the
// fixed integrator step (0 for exact flows); sampling cadences must be
// multiples of it so repeated advances replay the same steps.
template <class S>
concept Semigroup = requires(const S& s, const PhasePoint& x, double t) {
  { s.advance(x, t) } -> std::convertible_to<PhasePoint>;
  { s.metric() } -> std::convertible_to<const MetricSpec&>;
  { s.time_quantum() } -> std::convertible_to<double>;
};

using Orbit = std::vector<std::pair<double, PhasePoint>>;

inline void check_cadence(double every, double quantum, const char* who) {
  if (!(every > 0.0) || !std::isfinite(every))
    throw ConfigError(std::string(who) + ": sample cadence must be positive");
  if (quantum > 0.0) {
    const double q = every / quantum;
    if (q < 1.0 - 1e-9 || std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q))
      throw ConfigError(std::string(who) + ": cadence " + std::to_string(every) +
                        " is not a multiple of dt = " + std::to_string(quantum));
  }
}

// Samples at 0, every, 2 every, ... and at `horizon` itself.
template <Semigroup S>
Orbit sample_orbit(const S& sg, const PhasePoint& x, double horizon, double every) {
  check_cadence(every, sg.time_quantum(), "sample_orbit");
  if (!(horizon >= 0.0)) throw ConfigError("sample_orbit: horizon must be >= 0");
  Orbit out;
  out.emplace_back(0.0, x);
  const auto whole = std::size_t(std::floor(horizon / every + 1e-9));
  PhasePoint cur = x;
  for (std::size_t k = 1; k <= whole; ++k) {
    cur = sg.advance(cur, every);
    out.emplace_back(double(k) * every, cur);
  }
  const double reached = double(whole) * every;
  if (horizon - reached > 1e-9 * std::max(1.0, horizon)) {
    cur = sg.advance(cur, horizon - reached);
    out.emplace_back(horizon, cur);
  }
  return out;
}

template <Semigroup S>
Ensemble evolve_ensemble(const S& sg, const Ensemble& e, double t, std::string label = {}) {
  std::vector<PhasePoint> out(e.size());
  parallel_for(e.size(), [&](std::size_t i) { out[i] = sg.advance(e[i], t); });
  return Ensemble(std::move(out), label.empty() ? e.label() : std::move(label));
}

// Orbits of every ensemble member on a common sampling grid.
template <Semigroup S>
std::vector<Orbit> sample_orbits(const S& sg, const Ensemble& e, double horizon, double every) {
  std::vector<Orbit> out(e.size());
  parallel_for(e.size(), [&](std::size_t i) { out[i] = sample_orbit(sg, e[i], horizon, every); });
  return out;
}

// Ensemble of the i-th sample of each orbit.
inline Ensemble orbit_slice(const std::vector<Orbit>& orbits, std::size_t i, std::string label = {}) {
  std::vector<PhasePoint> pts;
  pts.reserve(orbits.size());
  for (const auto& o : orbits) pts.push_back(o.at(i).second);
  return Ensemble(std::move(pts), std::move(label));
}

// First sample time after which the orbit stays within `radius`.
inline double entering_time(const Orbit& orbit, const MetricSpec& m, double radius) {
  double t_enter = orbit.front().first;
  for (const auto& [t, x] : orbit)
    if (phase_norm(x, m) > radius) t_enter = INFINITY;
    else if (!std::isfinite(t_enter)) t_enter = t;
  return t_enter;
}

struct AbsorbingReport {
  double radius = 0.0;               // R0
  std::vector<double> entering_times;  // per probe point; inf if never inside
  double max_entering_time() const {
    return *std::max_element(entering_times.begin(), entering_times.end());
  }
};

/// Empirical absorbing ball. Each probe orbit runs to burn_in + window;
/// R0 = 1.1 x the largest phase norm seen on the window, and a point's
/// entering time is the first sample after which it stays inside R0.
/// A window whose largest norms sit at its far end and exceed the first
/// half by more than 10% is reported as non-dissipative.
template <Semigroup S>
AbsorbingReport absorbing_radius(const S& sg, const Ensemble& probe, double burn_in, double window,
                                 double sample_every) {
  if (!(burn_in > 0.0) || !(window > 0.0))
    throw ConfigError("absorbing_radius: burn_in and window must be positive");
  const auto orbits = sample_orbits(sg, probe, burn_in + window, sample_every);
  const auto& m = sg.metric();
  const double mid = burn_in + 0.5 * window;
  double r_max = 0.0;
  for (const auto& orbit : orbits) {
    double first_half = 0.0, second_half = 0.0, last = 0.0;
    for (const auto& [t, x] : orbit) {
      if (t < burn_in - 1e-12) continue;
      const double r = phase_norm(x, m);
      if (t <= mid)
        first_half = std::max(first_half, r);
      else
        second_half = std::max(second_half, r);
      last = r;
    }
    if (second_half > 1.1 * first_half && last >= second_half)
      throw NumericalError("absorbing_radius: phase norm still growing at horizon " +
                           std::to_string(burn_in + window) + " (non-dissipative at horizon)");
    r_max = std::max({r_max, first_half, second_half});
  }
  AbsorbingReport rep;
  rep.radius = 1.1 * r_max;
  for (const auto& orbit : orbits) rep.entering_times.push_back(entering_time(orbit, m, rep.radius));
  return rep;
}

// Entering times of `e` into the ball of radius R0, searched up to `horizon`.
template <Semigroup S>
std::vector<double> entering_times(const S& sg, const Ensemble& e, double radius, double horizon,
                                   double sample_every) {
  const auto orbits = sample_orbits(sg, e, horizon, sample_every);
  std::vector<double> out;
  for (const auto& o : orbits) out.push_back(entering_time(o, sg.metric(), radius));
  return out;
}

}  // namespace attractor_lab
