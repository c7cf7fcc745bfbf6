#pragma once

// Computable surrogate of the compact phi-attracting set
//
//   A* = U_{m >= t0} U_{t >= 0} S(t) E_m  U  omega(B0),
//
// where E_m is a finite phi(m)-net of S(m)B0 made of images of points of B0.
// Truncations: m runs over [m_min, m_max], orbits over [0, T_orbit], and
// omega(B0) is replaced by the absorbed sample evolved to 2 T_orbit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cover.hpp"
#include "decay_law.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "phase_space.hpp"
#include "semigroup.hpp"

namespace attractor_lab {

inline constexpr double kNetRadiusFloor = 1e-10;

struct NetEntry {
  int birth_time = 0;
  PhasePoint seed;     // a point of the absorbed sample (or its quantized neighbor)
  PhasePoint evolved;  // S(birth_time) seed
};

struct AttractingSetApprox {
  std::vector<NetEntry> net_entries;
  // orbits[i] samples S(tau) net_entries[i].evolved for tau in [0, T_orbit].
  std::vector<Orbit> orbits;
  Ensemble attractor_proxy;
  DecayLaw law;
  int m_min = 1;
  int m_max = 1;
  double orbit_horizon = 0.0;
  double orbit_sample_every = 0.0;

  std::vector<PhasePoint> orbit_samples() const {
    std::vector<PhasePoint> out;
    for (const auto& o : orbits)
      for (const auto& s : o) out.push_back(s.second);
    return out;
  }

  // Orbit samples followed by the attractor proxy.
  std::vector<PhasePoint> all_points() const {
    auto out = orbit_samples();
    out.insert(out.end(), attractor_proxy.begin(), attractor_proxy.end());
    return out;
  }
};

// Indices of a radius-r net of `pts`: start at the max-norm point, then keep
// adding the point farthest from the chosen set while it is farther than r.
// Ties go to the lowest index.
inline std::vector<std::size_t> select_net(std::span<const PhasePoint> pts, double radius,
                                           const MetricSpec& m) {
  const std::size_t n = pts.size();
  std::size_t first = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = phase_norm(pts[i], m);
    if (r > best) {
      best = r;
      first = i;
    }
  }
  std::vector<std::size_t> centers{first};
  std::vector<double> gap(n);
  for (std::size_t i = 0; i < n; ++i) gap[i] = phase_distance(pts[i], pts[first], m);
  for (;;) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (gap[i] > gap[far]) far = i;
    if (gap[far] <= radius) break;
    centers.push_back(far);
    for (std::size_t i = 0; i < n; ++i) gap[i] = std::min(gap[i], phase_distance(pts[i], pts[far], m));
  }
  return centers;
}

// Largest distance from a point of `pts` to its nearest center.
inline double covering_radius(std::span<const PhasePoint> pts, std::span<const PhasePoint> centers,
                              const MetricSpec& m) {
  return hausdorff_semidist(pts, centers, m);
}

namespace detail {

inline double net_radius(const DecayLaw& law, int m) {
  const double r = law.eval(double(m));
  if (!(r >= kNetRadiusFloor))
    throw NumericalError("build_net: law radius " + std::to_string(r) + " at m = " + std::to_string(m) +
                         " is below the distance floor");
  return r;
}

inline std::vector<NetEntry> net_from_evolved(const Ensemble& absorbed, const Ensemble& evolved, int m,
                                              double radius, const MetricSpec& spec) {
  std::vector<NetEntry> out;
  for (auto i : select_net(evolved.points(), radius, spec))
    out.push_back({m, absorbed[i], evolved[i]});
  return out;
}

}  // namespace detail

/// phi(m)-net of S(m) absorbed built from images of absorbed points.
template <Semigroup S>
std::vector<NetEntry> build_net(const S& sg, const Ensemble& absorbed, int m, const DecayLaw& law) {
  if (m < 1) throw ConfigError("build_net: m must be >= 1");
  const double radius = detail::net_radius(law, m);
  const Ensemble evolved = evolve_ensemble(sg, absorbed, double(m));
  return detail::net_from_evolved(absorbed, evolved, m, radius, sg.metric());
}

template <Semigroup S>
AttractingSetApprox build_attracting_set(const S& sg, const Ensemble& absorbed, int m_min, int m_max,
                                         const DecayLaw& law, double orbit_horizon,
                                         double orbit_sample_every) {
  if (m_min < 1 || m_max < m_min) throw ConfigError("build_attracting_set: need 1 <= m_min <= m_max");
  if (!(orbit_horizon >= double(m_max)))
    throw ConfigError("build_attracting_set: T_orbit must be >= m_max");
  check_cadence(orbit_sample_every, sg.time_quantum(), "build_attracting_set");
  for (int m = m_min; m <= m_max; ++m) detail::net_radius(law, m);

  AttractingSetApprox out{{}, {}, absorbed, law, m_min, m_max, orbit_horizon, orbit_sample_every};
  Ensemble current = evolve_ensemble(sg, absorbed, double(m_min));
  for (int m = m_min; m <= m_max; ++m) {
    if (m > m_min) current = evolve_ensemble(sg, current, 1.0);
    auto net = detail::net_from_evolved(absorbed, current, m, law.eval(double(m)), sg.metric());
    out.net_entries.insert(out.net_entries.end(), net.begin(), net.end());
  }
  out.orbits.resize(out.net_entries.size());
  parallel_for(out.net_entries.size(), [&](std::size_t i) {
    out.orbits[i] = sample_orbit(sg, out.net_entries[i].evolved, orbit_horizon, orbit_sample_every);
  });
  out.attractor_proxy = evolve_ensemble(sg, absorbed, 2.0 * orbit_horizon, "attractor_proxy");
  return out;
}

struct PerturbedNet {
  std::vector<NetEntry> entries;
  double quantization = 0.0;    // step actually used
  double cover_radius = 0.0;    // measured covering radius of S(m) absorbed
  double allowed_radius = 0.0;  // (1 + eps) phi(m)
};

inline PhasePoint quantize(const PhasePoint& x, double q) {
  if (q == 0.0) return x;
  auto round_to = [q](std::vector<double> v) {
    for (auto& c : v) c = std::round(c / q) * q;
    return v;
  };
  return PhasePoint(round_to(x.position()), round_to(x.velocity()));
}

/// Net whose seeds are quantized to a grid of step q (the dense subset).
/// q is halved until every quantized seed lands within eps * phi(m) of the
/// original image at time m.
template <Semigroup S>
PerturbedNet perturbed_net(const S& sg, const Ensemble& absorbed, int m, const DecayLaw& law, double eps,
                           double q) {
  if (!(eps > 0.0)) throw ConfigError("perturbed_net: eps must be positive");
  if (!(q >= 0.0)) throw ConfigError("perturbed_net: quantization step must be >= 0");
  const double radius = detail::net_radius(law, m);
  const Ensemble evolved = evolve_ensemble(sg, absorbed, double(m));
  const auto base = detail::net_from_evolved(absorbed, evolved, m, radius, sg.metric());

  PerturbedNet out;
  out.allowed_radius = (1.0 + eps) * radius;
  for (;;) {
    std::vector<NetEntry> trial(base.size());
    parallel_for(base.size(), [&](std::size_t i) {
      const PhasePoint s = quantize(base[i].seed, q);
      trial[i] = {m, s, q == 0.0 ? base[i].evolved : sg.advance(s, double(m))};
    });
    bool ok = true;
    for (std::size_t i = 0; i < base.size() && ok; ++i)
      ok = q == 0.0 || phase_distance(trial[i].evolved, base[i].evolved, sg.metric()) < eps * radius;
    if (ok) {
      out.entries = std::move(trial);
      out.quantization = q;
      break;
    }
    q *= 0.5;
    if (q < 1e-12)
      throw NumericalError("perturbed_net: quantization below 1e-12 without meeting the eps * phi(m) budget");
  }
  std::vector<PhasePoint> centers;
  for (const auto& e : out.entries) centers.push_back(e.evolved);
  out.cover_radius = covering_radius(evolved.points(), centers, sg.metric());
  if (out.cover_radius > out.allowed_radius * (1.0 + 1e-12))
    throw NumericalError("perturbed_net: measured cover radius exceeds (1 + eps) phi(m)");
  return out;
}

struct AttractionCertificate {
  std::vector<double> times;
  std::vector<double> measured;
  std::vector<double> bound;
  double satisfied_fraction = 0.0;
};

/// Measure dist(S(t) fresh, A*) against phi(t - t_star - 1) on t_grid.
template <Semigroup S>
AttractionCertificate verify_attraction(const S& sg, const AttractingSetApprox& aset, const Ensemble& fresh,
                                        double t_star, std::span<const double> t_grid) {
  if (t_grid.empty()) throw ConfigError("verify_attraction: empty t_grid");
  const double lo = t_star + 1.0 + double(aset.m_min);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
      throw ConfigError("verify_attraction: t_grid must be strictly increasing");
    if (t_grid[i] < lo - 1e-9 || t_grid[i] > aset.orbit_horizon + 1e-9)
      throw ConfigError("verify_attraction: t = " + std::to_string(t_grid[i]) + " outside orbit coverage [" +
                        std::to_string(lo) + ", " + std::to_string(aset.orbit_horizon) + "]");
  }
  const auto target = aset.all_points();
  AttractionCertificate cert;
  Ensemble current = fresh;
  double now = 0.0;
  std::size_t ok = 0;
  for (double t : t_grid) {
    current = evolve_ensemble(sg, current, t - now);
    now = t;
    const double d = hausdorff_semidist(current.points(), target, sg.metric());
    const double b = aset.law.eval(t - t_star - 1.0);
    cert.times.push_back(t);
    cert.measured.push_back(d);
    cert.bound.push_back(b);
    ok += d <= b ? 1 : 0;
  }
  cert.satisfied_fraction = double(ok) / double(t_grid.size());
  return cert;
}

}  // namespace attractor_lab
