#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
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

// ---------------------------------------------------------------------------
// Rate fitting

struct RateFit {
  double amplitude = 0.0;  // C-hat
  double rate = 0.0;       // beta-hat
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double floor_used = 0.0;
  std::size_t samples_used = 0;
};

/// Least squares for ln(value) = ln C - beta t over the samples above `floor`.
inline RateFit fit_exponential_rate(const DecayTrace& trace, double floor) {
  trace.validate();
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (trace.values[i] > floor) {
      ts.push_back(trace.times[i]);
      ys.push_back(std::log(trace.values[i]));
    }
  if (ts.size() < 4)
    throw NumericalError("fit_exponential_rate: " + std::to_string(ts.size()) +
                         " samples above floor, need at least 4");
  const double n = double(ts.size());
  const double tm = std::accumulate(ts.begin(), ts.end(), 0.0) / n;
  const double ym = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - tm) * (ts[i] - tm);
    sty += (ts[i] - tm) * (ys[i] - ym);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  const double slope = sty / stt;
  const double icpt = ym - slope * tm;
  double ssr = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (icpt + slope * ts[i]);
    ssr += r * r;
  }
  if (!(slope < 0.0)) throw NumericalError("fit_exponential_rate: trace is not decaying");
  RateFit fit;
  fit.amplitude = std::exp(icpt);
  fit.rate = -slope;
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  fit.t_lo = ts.front();
  fit.t_hi = ts.back();
  fit.floor_used = floor;
  fit.samples_used = ts.size();
  return fit;
}

// Exponential law with the fitted rate and the smallest amplitude that
// dominates every sample used by the fit.
inline DecayLaw upper_envelope_law(const DecayTrace& trace, const RateFit& fit) {
  double amp = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (trace.values[i] > fit.floor_used)
      amp = std::max(amp, trace.values[i] * std::exp(fit.rate * trace.times[i]));
  return DecayLaw::exponential(amp, fit.rate);
}

// ---------------------------------------------------------------------------
// Predicted rates for the damped wave equation

struct PredictedRates {
  double rate_58 = 0.0;   // min(sqrt(lambda_1)/2, l/4)
  double rate_59 = 0.0;   // (l/3) ln 2, i.e. 2^(-l t/3) in natural-log units
  double period_T = 0.0;  // 3 / l
  double eta = 0.0;       // 1/sqrt(1 + l T) = 1/2 at T = 3/l
};

inline PredictedRates predicted_rate_bounds(double l, const MetricSpec& spec) {
  if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("predicted_rate_bounds: requires l > 0");
  PredictedRates r;
  r.rate_58 = std::min(std::sqrt(spec.lambda1()) / 2.0, l / 4.0);
  r.rate_59 = l / 3.0 * std::log(2.0);
  r.period_T = 3.0 / l;
  r.eta = 1.0 / std::sqrt(1.0 + l * r.period_T);
  return r;
}

inline double contraction_factor(double l, double period) { return 1.0 / std::sqrt(1.0 + l * period); }

// ---------------------------------------------------------------------------
// Repeated liminf on a finite double array

/// Finite surrogate of liminf_m liminf_n a[m][n]: the infimum over the
/// deepest admissible tail block m >= M, n >= N. Tail starts may go no
/// deeper than leaving `tail_fraction` of the rows/columns, so the block is
/// never a single trailing entry. Non-finite entries (e.g. an excluded
/// diagonal) are skipped; a block with no finite entry yields +inf.
inline double repeated_liminf_diag(const std::vector<std::vector<double>>& a, double tail_fraction = 0.5) {
  if (a.size() < 2 || a.front().size() < 2) throw ConfigError("repeated_liminf_diag: need at least 2x2");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw ConfigError("repeated_liminf_diag: tail_fraction must be in (0, 1]");
  const std::size_t rows = a.size();
  const std::size_t cols = a.front().size();
  for (const auto& r : a)
    if (r.size() != cols) throw ConfigError("repeated_liminf_diag: ragged matrix");
  const auto tail = [&](std::size_t len) {
    return std::max<std::size_t>(1, std::size_t(std::ceil(tail_fraction * double(len))));
  };
  // Among admissible starts the deepest one has the largest block infimum.
  const std::size_t m0 = rows - tail(rows);
  const std::size_t n0 = cols - tail(cols);
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t m = m0; m < rows; ++m)
    for (std::size_t n = n0; n < cols; ++n)
      if (std::isfinite(a[m][n])) v = std::min(v, a[m][n]);
  return v;
}

// ---------------------------------------------------------------------------
// Hausdorff criterion: dist(S(t) B0, A) <= phi(t) implies alpha <= 2 phi

struct CriterionRow {
  double t = 0.0;
  double measured = 0.0;    // semidistance, or alpha proxy
  double bound = 0.0;       // phi(t)
  double alpha = 0.0;       // alpha proxy of the evolved sample
  double alpha_bound = 0.0; // implied 2 phi(t) (or 3 phi(t))
  bool satisfied = false;
  bool alpha_within = false;
};

struct CriterionReport {
  std::vector<CriterionRow> rows;
  double satisfied_fraction = 0.0;
  double alpha_within_fraction = 0.0;
};

inline void finish(CriterionReport& rep) {
  std::size_t ok = 0, alpha_ok = 0;
  for (const auto& r : rep.rows) {
    ok += r.satisfied;
    alpha_ok += r.alpha_within;
  }
  rep.satisfied_fraction = rep.rows.empty() ? 0.0 : double(ok) / double(rep.rows.size());
  rep.alpha_within_fraction = rep.rows.empty() ? 0.0 : double(alpha_ok) / double(rep.rows.size());
}

inline void check_increasing(std::span<const double> t_grid, const char* who) {
  if (t_grid.empty()) throw ConfigError(std::string(who) + ": empty t_grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw ConfigError(std::string(who) + ": t_grid not increasing");
  if (t_grid.front() < 0.0) throw ConfigError(std::string(who) + ": negative time");
}

template <Semigroup S, class Bound>
CriterionReport check_hausdorff_criterion(const S& sg, const Ensemble& candidate, const Ensemble& absorbed,
                                          std::span<const double> t_grid, const Bound& phi,
                                          std::size_t m_clusters) {
  check_increasing(t_grid, "check_hausdorff_criterion");
  CriterionReport rep;
  Ensemble cur = absorbed;
  double now = 0.0;
  for (double t : t_grid) {
    cur = evolve_ensemble(sg, cur, t - now);
    now = t;
    CriterionRow r;
    r.t = t;
    r.measured = hausdorff_semidist(cur, candidate, sg.metric());
    r.bound = phi(t);
    r.alpha = alpha_proxy(cur, m_clusters, sg.metric(), CoverMethod::greedy).max_diameter;
    r.alpha_bound = 2.0 * r.bound;
    r.satisfied = r.measured <= r.bound;
    r.alpha_within = r.alpha <= r.alpha_bound;
    rep.rows.push_back(r);
  }
  finish(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Tail projection: sup_x |(I - P_n) S(t) x|

template <Semigroup S>
DecayTrace tail_projection_decay(const S& sg, const Ensemble& absorbed, std::size_t n_low_modes,
                                 std::span<const double> t_grid) {
  if (n_low_modes >= sg.metric().mode_count())
    throw ConfigError("tail_projection_decay: n_low_modes must be < mode_count");
  check_increasing(t_grid, "tail_projection_decay");
  DecayTrace tr;
  tr.quantity = TraceQuantity::tail_norm;
  Ensemble cur = absorbed;
  double now = 0.0;
  for (double t : t_grid) {
    cur = evolve_ensemble(sg, cur, t - now);
    now = t;
    double sup = 0.0;
    for (const auto& x : cur) sup = std::max(sup, tail_norm(x, sg.metric(), n_low_modes));
    tr.times.push_back(t);
    tr.values.push_back(sup);
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Contractive-function criterion: conclusion alpha(S(t)B) <= 3 phi(t)

struct ContractiveRow {
  double t = 0.0;
  std::vector<double> residuals;  // per input pair: max(0, d(S(t)y1, S(t)y2) - phi(t))
  double liminf = 0.0;            // repeated_liminf_diag of the point-pair residual matrix
  double alpha = 0.0;
  double alpha_bound = 0.0;       // 3 phi(t)
  bool conclusion_holds = false;
};

struct ContractiveReport {
  std::vector<ContractiveRow> rows;
  double conclusion_fraction = 0.0;
};

template <Semigroup S, class Bound>
ContractiveReport contractive_inequality_check(const S& sg,
                                               std::span<const std::pair<PhasePoint, PhasePoint>> pairs,
                                               std::span<const double> t_grid, const Bound& phi,
                                               std::size_t m_clusters) {
  if (pairs.empty()) throw ConfigError("contractive_inequality_check: no pairs");
  check_increasing(t_grid, "contractive_inequality_check");
  // Distinct pair members in order of appearance, and each pair's member indices.
  std::vector<PhasePoint> pts;
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  auto index_of = [&](const PhasePoint& x) {
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (pts[i] == x) return i;
    pts.push_back(x);
    return pts.size() - 1;
  };
  for (const auto& [y1, y2] : pairs) {
    const std::size_t i = index_of(y1);
    const std::size_t j = index_of(y2);
    idx.emplace_back(i, j);
  }
  const auto& m = sg.metric();
  ContractiveReport rep;
  Ensemble cur(pts);
  double now = 0.0;
  std::size_t holds = 0;
  for (double t : t_grid) {
    cur = evolve_ensemble(sg, cur, t - now);
    now = t;
    ContractiveRow row;
    row.t = t;
    const double bound = phi(t);
    const std::size_t n = cur.size();
    for (const auto& [i, j] : idx)
      row.residuals.push_back(std::max(0.0, phase_distance(cur[i], cur[j], m) - bound));
    // Row i holds the residuals against every other point, diagonal dropped.
    if (n >= 3) {
      std::vector<std::vector<double>> mat(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) mat[i].push_back(std::max(0.0, phase_distance(cur[i], cur[j], m) - bound));
      row.liminf = repeated_liminf_diag(mat);
    } else if (n == 2) {
      row.liminf = std::max(0.0, phase_distance(cur[0], cur[1], m) - bound);
    }
    row.alpha = alpha_proxy(cur, m_clusters, m, CoverMethod::greedy).max_diameter;
    row.alpha_bound = 3.0 * bound;
    row.conclusion_holds = row.alpha <= row.alpha_bound;
    holds += row.conclusion_holds;
    rep.rows.push_back(std::move(row));
  }
  rep.conclusion_fraction = double(holds) / double(rep.rows.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Quasi-stability: d(S(T)y1, S(T)y2) <= eta d(y1, y2) + g(rho(y1, y2))

struct QuasiStabilityReport {
  double period = 0.0;
  double eta_hat = 0.0;            // 95th percentile of conditioned ratios
  double eta_predicted = 0.0;      // 1/sqrt(1 + l T)
  std::size_t pair_count = 0;      // conditioned pairs
  std::size_t excluded_pairs = 0;  // coincident pairs, ratio undefined
  double threshold = 0.0;          // closeness delta-surrogate
  std::vector<double> per_period_alpha_ratios;  // alpha(S(nT)B0)/alpha(B0), n = 1..
  std::vector<double> predicted_bounds;         // 2 eta^n
};

// Linear-interpolated quantile (type 7) of an unsorted sample.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ConfigError("quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const auto lo = std::size_t(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

inline double ensemble_diameter(const Ensemble& e, const MetricSpec& m) {
  DistanceMatrix d(e.points(), m);
  double diam = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j) diam = std::max(diam, d(i, j));
  return diam;
}

struct QuasiStabilityOptions {
  std::size_t low_mode_threshold = 4;
  double closeness = 0.0;       // <= 0 selects 10% of the ensemble diameter
  std::size_t m_clusters = 4;
  double sample_every = 0.0;    // cadence for rho_2; <= 0 selects T/30 snapped to dt
  double damping = 0.0;         // l for the predicted eta; 0 leaves it unset
};

/// Pseudometrics: rho_1 = low-mode position distance, rho_2 = sup over [0, T]
/// of the position-only L^2 distance between the two trajectories.
template <Semigroup S>
QuasiStabilityReport quasistability_estimate(const S& sg, const Ensemble& absorbed, double period,
                                             std::size_t n_periods, const QuasiStabilityOptions& opt) {
  if (!(period > 0.0)) throw ConfigError("quasistability_estimate: T must be positive");
  if (absorbed.size() < 2) throw ConfigError("quasistability_estimate: need at least 2 points");
  const auto& m = sg.metric();
  const std::size_t n = absorbed.size();
  const std::size_t low = std::min(opt.low_mode_threshold, m.mode_count());

  double every = opt.sample_every;
  if (!(every > 0.0)) {
    every = period / 30.0;
    if (const double q = sg.time_quantum(); q > 0.0) every = std::max(1.0, std::round(every / q)) * q;
  }
  const auto orbits = sample_orbits(sg, absorbed, period, every);

  QuasiStabilityReport rep;
  rep.period = period;
  rep.threshold = opt.closeness > 0.0 ? opt.closeness : 0.1 * ensemble_diameter(absorbed, m);
  if (opt.damping > 0.0) rep.eta_predicted = contraction_factor(opt.damping, period);

  auto position_l2 = [](const PhasePoint& x, const PhasePoint& y, std::size_t modes) {
    double s = 0.0;
    for (std::size_t j = 0; j < modes; ++j) {
      const double d = x.position()[j] - y.position()[j];
      s += d * d;
    }
    return std::sqrt(s);
  };

  std::vector<double> ratios;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d0 = phase_distance(absorbed[i], absorbed[j], m);
      if (d0 == 0.0) {
        ++rep.excluded_pairs;
        continue;
      }
      const double rho1 = position_l2(absorbed[i], absorbed[j], low);
      double rho2 = 0.0;
      for (std::size_t s = 0; s < orbits[i].size(); ++s)
        rho2 = std::max(rho2, position_l2(orbits[i][s].second, orbits[j][s].second, m.mode_count()));
      if (rho1 > rep.threshold || rho2 > rep.threshold) continue;
      ratios.push_back(phase_distance(orbits[i].back().second, orbits[j].back().second, m) / d0);
    }
  rep.pair_count = ratios.size();
  if (ratios.empty())
    throw NumericalError("quasistability_estimate: no pairs within closeness threshold " +
                         std::to_string(rep.threshold) + " (threshold too tight)");
  rep.eta_hat = quantile(ratios, 0.95);

  if (n_periods > 0) {
    const double a0 = alpha_proxy(absorbed, opt.m_clusters, m, CoverMethod::greedy).max_diameter;
    if (!(a0 > 0.0)) throw NumericalError("quasistability_estimate: alpha proxy of B0 is zero");
    Ensemble cur = orbit_slice(orbits, orbits.front().size() - 1);
    for (std::size_t k = 1; k <= n_periods; ++k) {
      if (k > 1) cur = evolve_ensemble(sg, cur, period);
      rep.per_period_alpha_ratios.push_back(
          alpha_proxy(cur, opt.m_clusters, m, CoverMethod::greedy).max_diameter / a0);
      if (rep.eta_predicted > 0.0) rep.predicted_bounds.push_back(2.0 * std::pow(rep.eta_predicted, double(k)));
    }
  }
  return rep;
}

}  // namespace attractor_lab
