#pragma once

// Empirical noncompactness geometry of finite point sets: Hausdorff
// semidistance and the m-cluster min-max-diameter proxy for the Kuratowski
// measure. A finite set has measure zero, so what decays along S(t)B is the
// best diameter achievable with a FIXED number of clusters.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"
#include "phase_space.hpp"

namespace attractor_lab {

enum class CoverMethod { greedy, exact };

inline std::string_view to_string(CoverMethod m) {
  return m == CoverMethod::greedy ? "greedy" : "exact";
}

inline constexpr std::size_t kExactCoverCap = 12;

struct CoverReport {
  std::size_t cluster_count = 0;
  double max_diameter = 0.0;
  // Max distance from a point to its cluster center (greedy only; the
  // k-center radius). Zero for the exact method.
  double center_radius = 0.0;
  std::vector<std::size_t> assignment;  // point index -> cluster index
  CoverMethod method = CoverMethod::greedy;
};

// Dense symmetric distance matrix, row-major.
class DistanceMatrix {
 public:
  DistanceMatrix(std::span<const PhasePoint> pts, const MetricSpec& m) : n_(pts.size()), d_(n_ * n_) {
    parallel_for(n_, [&](std::size_t i) {
      for (std::size_t j = i + 1; j < n_; ++j) d_[i * n_ + j] = phase_distance(pts[i], pts[j], m);
    });
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < i; ++j) d_[i * n_ + j] = d_[j * n_ + i];
  }

  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

// dist(a, b) = max_{x in a} min_{y in b} d(x, y).
inline double hausdorff_semidist(std::span<const PhasePoint> a, std::span<const PhasePoint> b,
                                 const MetricSpec& m) {
  if (a.empty() || b.empty()) throw ConfigError("hausdorff_semidist: empty set");
  std::vector<double> nearest(a.size());
  parallel_for(a.size(), [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : b) best = std::min(best, phase_distance(a[i], y, m));
    nearest[i] = best;
  });
  return *std::max_element(nearest.begin(), nearest.end());
}

inline double hausdorff_semidist(const Ensemble& a, const Ensemble& b, const MetricSpec& m) {
  return hausdorff_semidist(std::span<const PhasePoint>(a.points()),
                            std::span<const PhasePoint>(b.points()), m);
}

// Largest intra-cluster pairwise distance for a given assignment.
inline double cluster_max_diameter(const DistanceMatrix& d, std::span<const std::size_t> assignment) {
  double diam = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    for (std::size_t j = i + 1; j < assignment.size(); ++j)
      if (assignment[i] == assignment[j]) diam = std::max(diam, d(i, j));
  return diam;
}

namespace detail {

// Farthest-point seeding: first center is the max-norm point, then the point
// farthest from the chosen centers; ties go to the lowest index. Stops early
// once every point coincides with a center.
inline std::vector<std::size_t> farthest_point_centers(std::span<const PhasePoint> pts,
                                                       const DistanceMatrix& d, std::size_t k,
                                                       const MetricSpec& m) {
  const std::size_t n = pts.size();
  std::size_t first = 0;
  double best_norm = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = phase_norm(pts[i], m);
    if (r > best_norm) {
      best_norm = r;
      first = i;
    }
  }
  std::vector<std::size_t> centers{first};
  std::vector<double> gap(n);
  for (std::size_t i = 0; i < n; ++i) gap[i] = d(i, first);
  while (centers.size() < k) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (gap[i] > gap[far]) far = i;
    if (gap[far] == 0.0) break;
    centers.push_back(far);
    for (std::size_t i = 0; i < n; ++i) gap[i] = std::min(gap[i], d(i, far));
  }
  return centers;
}

struct ExactSearch {
  const DistanceMatrix& d;
  std::size_t n;
  std::size_t max_blocks;
  std::vector<std::size_t> current;
  std::vector<std::size_t> best;
  double best_diam;

  void run(std::size_t i, std::size_t blocks, double diam) {
    if (diam >= best_diam) return;
    if (i == n) {
      best_diam = diam;
      best = current;
      return;
    }
    const std::size_t limit = std::min(blocks + 1, max_blocks);
    for (std::size_t b = 0; b < limit; ++b) {
      double grown = diam;
      for (std::size_t j = 0; j < i; ++j)
        if (current[j] == b) grown = std::max(grown, d(i, j));
      current[i] = b;
      run(i + 1, std::max(blocks, b + 1), grown);
      if (best_diam == 0.0) return;
    }
  }
};

}  // namespace detail

/// Cover a finite point set with at most `m_clusters` clusters and report the
/// largest cluster diameter.
///
/// greedy: farthest-point seeding, nearest-center assignment. Its k-center
/// radius is at most the optimal min-max diameter, so the reported diameter is
/// within a factor 2 of the exact value.
/// exact: branch and bound over set partitions, at most 12 points.
inline CoverReport alpha_proxy(std::span<const PhasePoint> pts, std::size_t m_clusters,
                               const MetricSpec& spec, CoverMethod method) {
  if (pts.empty()) throw ConfigError("alpha_proxy: empty point set");
  if (m_clusters < 1) throw ConfigError("alpha_proxy: m_clusters must be >= 1");
  const std::size_t n = pts.size();
  if (method == CoverMethod::exact && n > kExactCoverCap)
    throw ConfigError("alpha_proxy: exact method is capped at " + std::to_string(kExactCoverCap) +
                      " points (got " + std::to_string(n) + ")");

  DistanceMatrix d(pts, spec);
  CoverReport rep;
  rep.method = method;

  const auto centers = detail::farthest_point_centers(pts, d, std::min(m_clusters, n), spec);
  rep.assignment.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < centers.size(); ++c)
      if (d(i, centers[c]) < d(i, centers[arg])) arg = c;
    rep.assignment[i] = arg;
    rep.center_radius = std::max(rep.center_radius, d(i, centers[arg]));
  }
  rep.cluster_count = centers.size();
  rep.max_diameter = cluster_max_diameter(d, rep.assignment);
  if (method == CoverMethod::greedy) return rep;

  detail::ExactSearch search{d, n, m_clusters, std::vector<std::size_t>(n, 0), rep.assignment,
                             rep.max_diameter};
  // Seed with the greedy cover as incumbent; only strictly better partitions replace it.
  search.run(0, 0, 0.0);
  rep.assignment = search.best;
  rep.max_diameter = search.best_diam;
  rep.center_radius = 0.0;
  std::size_t used = 0;
  for (auto a : rep.assignment) used = std::max(used, a + 1);
  rep.cluster_count = used;
  return rep;
}

inline CoverReport alpha_proxy(const Ensemble& e, std::size_t m_clusters, const MetricSpec& spec,
                               CoverMethod method) {
  return alpha_proxy(std::span<const PhasePoint>(e.points()), m_clusters, spec, method);
}

enum class TraceQuantity { alpha_proxy, semidist, tail_norm };

inline std::string_view to_string(TraceQuantity q) {
  switch (q) {
    case TraceQuantity::alpha_proxy: return "alpha_proxy";
    case TraceQuantity::semidist: return "semidist";
    case TraceQuantity::tail_norm: return "tail_norm";
  }
  return "?";
}

inline TraceQuantity parse_trace_quantity(std::string_view s) {
  if (s == "alpha_proxy") return TraceQuantity::alpha_proxy;
  if (s == "semidist") return TraceQuantity::semidist;
  if (s == "tail_norm") return TraceQuantity::tail_norm;
  throw ConfigError("unknown trace quantity '" + std::string(s) + "'");
}

// Sampled t -> value series of one decaying quantity.
struct DecayTrace {
  std::vector<double> times;
  std::vector<double> values;
  TraceQuantity quantity = TraceQuantity::alpha_proxy;
  std::size_t m_clusters = 0;  // 0 when not a cover quantity

  void validate() const {
    if (times.size() != values.size()) throw ConfigError("DecayTrace: length mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw ConfigError("DecayTrace: times not strictly increasing");
    for (double v : values)
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("DecayTrace: negative or non-finite value");
  }

  std::size_t size() const noexcept { return times.size(); }
};

struct Snapshot {
  double time;
  Ensemble ensemble;
};

// Greedy alpha_proxy at fixed cluster budget for each snapshot.
inline DecayTrace decay_trace(std::span<const Snapshot> snapshots, std::size_t m_clusters,
                              const MetricSpec& spec) {
  DecayTrace tr;
  tr.quantity = TraceQuantity::alpha_proxy;
  tr.m_clusters = m_clusters;
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (i > 0 && !(snapshots[i].time > snapshots[i - 1].time))
      throw ConfigError("decay_trace: snapshot times must be strictly increasing");
    if (snapshots[i].ensemble.mode_count() != spec.mode_count())
      throw DimensionError("decay_trace: snapshot mode count does not match metric");
    tr.times.push_back(snapshots[i].time);
    tr.values.push_back(alpha_proxy(snapshots[i].ensemble, m_clusters, spec, CoverMethod::greedy)
                            .max_diameter);
  }
  return tr;
}

}  // namespace attractor_lab
