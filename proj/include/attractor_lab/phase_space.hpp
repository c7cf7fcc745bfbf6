#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace attractor_lab {

// Dirichlet Laplacian eigenvalues that weight the position part of the
// H^1_0 x L^2 phase metric.
class MetricSpec {
 public:
  MetricSpec(std::vector<double> eigenvalues, int spatial_dim = 1)
      : eigenvalues_(std::move(eigenvalues)), spatial_dim_(spatial_dim) {
    if (eigenvalues_.empty()) throw ConfigError("MetricSpec: no modes");
    if (spatial_dim_ != 1 && spatial_dim_ != 2)
      throw ConfigError("MetricSpec: spatial_dim must be 1 or 2");
    for (std::size_t j = 0; j < eigenvalues_.size(); ++j) {
      if (!std::isfinite(eigenvalues_[j]) || eigenvalues_[j] <= 0.0)
        throw ConfigError("MetricSpec: eigenvalues must be finite and positive");
      if (j > 0 && eigenvalues_[j] < eigenvalues_[j - 1])
        throw ConfigError("MetricSpec: eigenvalues must be nondecreasing");
    }
  }

  // lambda_j = j^2 on (0, pi).
  static MetricSpec interval(std::size_t modes) {
    std::vector<double> lam(modes);
    for (std::size_t j = 0; j < modes; ++j) lam[j] = double((j + 1) * (j + 1));
    return MetricSpec(std::move(lam), 1);
  }

  // Smallest `modes` values of i^2 + j^2 (i, j >= 1) on the square (0, pi)^2.
  static MetricSpec rectangle(std::size_t modes) {
    std::vector<double> lam;
    std::size_t side = 1;
    while (side * side < 4 * modes + 4) ++side;
    for (std::size_t i = 1; i <= side; ++i)
      for (std::size_t j = 1; j <= side; ++j) lam.push_back(double(i * i + j * j));
    std::sort(lam.begin(), lam.end());
    lam.resize(modes);
    return MetricSpec(std::move(lam), 2);
  }

  std::size_t mode_count() const noexcept { return eigenvalues_.size(); }
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  double lambda(std::size_t j) const { return eigenvalues_.at(j); }
  double lambda1() const noexcept { return eigenvalues_.front(); }
  int spatial_dim() const noexcept { return spatial_dim_; }

 private:
  std::vector<double> eigenvalues_;
  int spatial_dim_;
};

// Galerkin state (u, u_t) in eigen-coefficients.
class PhasePoint {
 public:
  PhasePoint() = default;

  PhasePoint(std::vector<double> position, std::vector<double> velocity)
      : position_(std::move(position)), velocity_(std::move(velocity)) {
    if (position_.empty()) throw DimensionError("PhasePoint: zero modes");
    if (position_.size() != velocity_.size())
      throw DimensionError("PhasePoint: position/velocity length mismatch");
    for (std::size_t j = 0; j < position_.size(); ++j)
      if (!std::isfinite(position_[j]) || !std::isfinite(velocity_[j]))
        throw ConfigError("PhasePoint: non-finite coefficient");
  }

  static PhasePoint zero(std::size_t modes) {
    return PhasePoint(std::vector<double>(modes, 0.0), std::vector<double>(modes, 0.0));
  }

  std::size_t mode_count() const noexcept { return position_.size(); }
  const std::vector<double>& position() const noexcept { return position_; }
  const std::vector<double>& velocity() const noexcept { return velocity_; }

  PhasePoint scaled(double s) const {
    PhasePoint out = *this;
    for (auto& v : out.position_) v *= s;
    for (auto& v : out.velocity_) v *= s;
    return out;
  }

  friend PhasePoint operator+(const PhasePoint& a, const PhasePoint& b) {
    if (a.mode_count() != b.mode_count()) throw DimensionError("PhasePoint +: mode mismatch");
    PhasePoint out = a;
    for (std::size_t j = 0; j < a.mode_count(); ++j) {
      out.position_[j] += b.position_[j];
      out.velocity_[j] += b.velocity_[j];
    }
    return out;
  }

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;

 private:
  std::vector<double> position_;
  std::vector<double> velocity_;
};

// Nonempty labeled sample standing in for a bounded set.
class Ensemble {
 public:
  explicit Ensemble(std::vector<PhasePoint> points, std::string label = {})
      : points_(std::move(points)), label_(std::move(label)) {
    if (points_.empty()) throw ConfigError("Ensemble '" + label_ + "' is empty");
    const auto n = points_.front().mode_count();
    for (const auto& p : points_)
      if (p.mode_count() != n) throw DimensionError("Ensemble: mixed mode counts");
  }

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t mode_count() const noexcept { return points_.front().mode_count(); }
  const std::vector<PhasePoint>& points() const noexcept { return points_; }
  const PhasePoint& operator[](std::size_t i) const { return points_[i]; }
  const std::string& label() const noexcept { return label_; }

  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

 private:
  std::vector<PhasePoint> points_;
  std::string label_;
};

// Weighted distance sqrt(sum w_j (da_j)^2 + sum (db_j)^2) with arbitrary
// positive weights; phase_distance is this with the Laplacian eigenvalues.
inline double weighted_phase_distance(const PhasePoint& a, const PhasePoint& b,
                                      std::span<const double> weights) {
  const auto n = weights.size();
  if (a.mode_count() != n || b.mode_count() != n)
    throw DimensionError("phase_distance: mode count " + std::to_string(a.mode_count()) + "/" +
                         std::to_string(b.mode_count()) + " vs metric " + std::to_string(n));
  const auto& pa = a.position();
  const auto& pb = b.position();
  const auto& va = a.velocity();
  const auto& vb = b.velocity();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dp = pa[j] - pb[j];
    const double dv = va[j] - vb[j];
    sum += weights[j] * dp * dp + dv * dv;
  }
  if (!std::isfinite(sum)) throw DomainError("phase_distance: non-finite result");
  return std::sqrt(sum);
}

inline double phase_distance(const PhasePoint& a, const PhasePoint& b, const MetricSpec& m) {
  return weighted_phase_distance(a, b, m.eigenvalues());
}

inline double phase_norm(const PhasePoint& a, const MetricSpec& m) {
  return phase_distance(a, PhasePoint::zero(a.mode_count()), m);
}

// Bounding radius about the origin.
inline double ensemble_radius(const Ensemble& e, const MetricSpec& m) {
  double r = 0.0;
  for (const auto& p : e) r = std::max(r, phase_norm(p, m));
  return r;
}

// Phase norm restricted to modes with index >= first_mode (0-based).
inline double tail_norm(const PhasePoint& a, const MetricSpec& m, std::size_t first_mode) {
  if (a.mode_count() != m.mode_count()) throw DimensionError("tail_norm: mode mismatch");
  double sum = 0.0;
  for (std::size_t j = first_mode; j < a.mode_count(); ++j)
    sum += m.lambda(j) * a.position()[j] * a.position()[j] + a.velocity()[j] * a.velocity()[j];
  return std::sqrt(sum);
}

}  // namespace attractor_lab
