#pragma once

// Spectral-Galerkin semigroup for the damped wave equation on (0, pi)
//
//   u_tt - u_xx + k ||u_t||^p u_t + l u_t + f(u) = \int K(x,y) u_t(y) dy + h,
//   u(0) = u(pi) = 0,
//
// in the orthonormal sine basis e_j = sqrt(2/pi) sin(j x). The nonlinearity
// is evaluated pseudo-spectrally on interior grid points x_i = i pi/(M+1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "phase_space.hpp"

namespace attractor_lab {

struct WaveSystemConfig {
  double k = 0.0;  // nonlinear damping coefficient
  double p = 2.0;  // nonlinear damping exponent
  double l = 1.0;  // linear damping coefficient
  std::vector<double> f_coeffs;  // f(s) = sum c_i s^i, lowest degree first
  // Finite-rank kernel K = sum_q kappa_q g_q g_q^T in the eigenbasis.
  std::vector<double> kernel_weights;
  std::vector<std::vector<double>> kernel_vectors;
  std::vector<double> h_coeffs;  // forcing, zero-padded to mode_count
  std::size_t mode_count = 16;
  double dt = 0.01;
  std::size_t collocation_points = 0;  // 0 selects 2N+1

  std::size_t grid_points() const noexcept {
    return collocation_points == 0 ? 2 * mode_count + 1 : collocation_points;
  }

  MetricSpec metric() const { return MetricSpec::interval(mode_count); }

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (mode_count < 1) throw ConfigError("mode_count must be >= 1");
    if (!(k >= 0.0) || !finite(k)) throw ConfigError("k must be a finite value >= 0");
    if (!(p > 0.0) || !finite(p)) throw ConfigError("p must be > 0");
    if (!(l >= 0.0) || !finite(l)) throw ConfigError("l must be a finite value >= 0");
    if (!(dt > 0.0) || !finite(dt)) throw ConfigError("dt must be > 0");
    const double dt_max = 0.5 / double(mode_count);  // 0.5 / sqrt(lambda_N)
    if (dt > dt_max * (1.0 + 1e-12))
      throw ConfigError("dt = " + std::to_string(dt) + " exceeds stability guard 0.5/sqrt(lambda_N) = " +
                        std::to_string(dt_max));
    if (grid_points() < 2 * mode_count + 1)
      throw ConfigError("collocation_points must be >= 2N+1 = " + std::to_string(2 * mode_count + 1));
    for (double c : f_coeffs)
      if (!finite(c)) throw ConfigError("f_coeffs must be finite");
    std::size_t deg = f_coeffs.size();
    while (deg > 0 && f_coeffs[deg - 1] == 0.0) --deg;
    if (deg > 0) {
      // Zero polynomial is allowed (linear reduction); otherwise require odd
      // top degree with positive leading coefficient.
      if ((deg - 1) % 2 == 0 || !(f_coeffs[deg - 1] > 0.0))
        throw ConfigError("f must have odd top degree with positive leading coefficient");
    }
    if (kernel_weights.size() != kernel_vectors.size())
      throw ConfigError("kernel_weights and kernel_vectors must have equal length");
    for (std::size_t q = 0; q < kernel_weights.size(); ++q) {
      if (!finite(kernel_weights[q])) throw ConfigError("kernel weights must be finite");
      if (kernel_vectors[q].size() > mode_count)
        throw ConfigError("kernel vector longer than mode_count");
      for (double g : kernel_vectors[q])
        if (!finite(g)) throw ConfigError("kernel vectors must be finite");
    }
    if (h_coeffs.size() > mode_count) throw ConfigError("h_coeffs longer than mode_count");
    for (double h : h_coeffs)
      if (!finite(h)) throw ConfigError("h_coeffs must be finite");
  }
};

struct Energy {
  double E = 0.0;  // 1/2 (|u_t|^2 + |grad u|^2)
  double L = 0.0;  // E + \int F(u) - (h, u)
};

/// Precomputed collocation operators for one configuration. Immutable after
/// construction, so one instance may be shared by concurrent trajectories.
class WaveGalerkin {
 public:
  explicit WaveGalerkin(WaveSystemConfig cfg) : cfg_(std::move(cfg)), metric_(MetricSpec::interval(1)) {
    cfg_.validate();
    n_ = cfg_.mode_count;
    m_ = cfg_.grid_points();
    metric_ = cfg_.metric();
    weight_ = std::numbers::pi / double(m_ + 1);
    basis_.resize(m_ * n_);
    const double norm = std::sqrt(2.0 / std::numbers::pi);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        basis_[i * n_ + j] = norm * std::sin(double((j + 1) * (i + 1)) * weight_);
    h_.assign(n_, 0.0);
    std::copy(cfg_.h_coeffs.begin(), cfg_.h_coeffs.end(), h_.begin());
    for (const auto& g : cfg_.kernel_vectors) {
      std::vector<double> padded(n_, 0.0);
      std::copy(g.begin(), g.end(), padded.begin());
      kernel_.push_back(std::move(padded));
    }
    f_ = cfg_.f_coeffs;
    while (!f_.empty() && f_.back() == 0.0) f_.pop_back();
    antiderivative_.assign(f_.size() + 1, 0.0);
    for (std::size_t i = 0; i < f_.size(); ++i) antiderivative_[i + 1] = f_[i] / double(i + 1);
  }

  const WaveSystemConfig& config() const noexcept { return cfg_; }
  const MetricSpec& metric() const noexcept { return metric_; }
  std::size_t mode_count() const noexcept { return n_; }
  std::size_t grid_points() const noexcept { return m_; }
  double grid_x(std::size_t i) const noexcept { return double(i + 1) * weight_; }
  double quadrature_weight() const noexcept { return weight_; }

  double f(double s) const noexcept { return horner(f_, s); }
  double F(double s) const noexcept { return horner(antiderivative_, s); }

  // u(x_i) = sum_j a_j e_j(x_i)
  void to_grid(const double* a, std::vector<double>& u) const {
    u.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double* row = &basis_[i * n_];
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += row[j] * a[j];
      u[i] = s;
    }
  }

  // g_j = w sum_i g(x_i) e_j(x_i); exact L^2 projection for sine polynomials
  // of degree below 2(M+1) - N.
  void project(const std::vector<double>& g, double* out) const {
    std::fill(out, out + n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double* row = &basis_[i * n_];
      const double gi = weight_ * g[i];
      for (std::size_t j = 0; j < n_; ++j) out[j] += gi * row[j];
    }
  }

  struct Workspace {
    std::vector<double> grid;
    std::vector<double> modal;
  };

  // Time derivative of the packed state y = (a_1..a_N, b_1..b_N).
  void rhs(const double* y, double* dy, Workspace& work) const {
    const double* a = y;
    const double* b = y + n_;
    double* da = dy;
    double* db = dy + n_;
    double speed2 = 0.0;
    for (std::size_t j = 0; j < n_; ++j) speed2 += b[j] * b[j];
    const double damp = cfg_.k * std::pow(speed2, 0.5 * cfg_.p) + cfg_.l;
    for (std::size_t j = 0; j < n_; ++j) {
      da[j] = b[j];
      db[j] = -metric_.lambda(j) * a[j] - damp * b[j] + h_[j];
    }
    if (!f_.empty()) {
      to_grid(a, work.grid);
      for (auto& u : work.grid) u = f(u);
      work.modal.resize(n_);
      project(work.grid, work.modal.data());
      for (std::size_t j = 0; j < n_; ++j) db[j] -= work.modal[j];
    }
    for (std::size_t q = 0; q < kernel_.size(); ++q) {
      const auto& g = kernel_[q];
      double dot = 0.0;
      for (std::size_t j = 0; j < n_; ++j) dot += g[j] * b[j];
      const double c = cfg_.kernel_weights[q] * dot;
      for (std::size_t j = 0; j < n_; ++j) db[j] += c * g[j];
    }
  }

  PhasePoint rhs(const PhasePoint& x) const {
    check(x);
    std::vector<double> y = pack(x), dy(2 * n_);
    Workspace work;
    rhs(y.data(), dy.data(), work);
    for (double v : dy)
      if (!std::isfinite(v)) throw BlowUpError("wave_rhs: non-finite derivative", 0.0);
    return unpack(dy);
  }

  Energy lyapunov(const PhasePoint& x) const {
    check(x);
    Energy e;
    for (std::size_t j = 0; j < n_; ++j) {
      const double a = x.position()[j];
      const double b = x.velocity()[j];
      e.E += 0.5 * (b * b + metric_.lambda(j) * a * a);
    }
    double pot = 0.0;
    if (!f_.empty()) {
      std::vector<double> u;
      to_grid(x.position().data(), u);
      for (double ui : u) pot += F(ui);
      pot *= weight_;
    }
    double work = 0.0;
    for (std::size_t j = 0; j < n_; ++j) work += h_[j] * x.position()[j];
    e.L = e.E + pot - work;
    return e;
  }

  // Advance the packed state by `steps` RK4 steps of size h, starting at time t0.
  void rk4(std::vector<double>& y, std::size_t steps, double h, double t0) const {
    const std::size_t s = 2 * n_;
    std::vector<double> k1(s), k2(s), k3(s), k4(s), tmp(s);
    Workspace work;
    for (std::size_t step = 0; step < steps; ++step) {
      rhs(y.data(), k1.data(), work);
      for (std::size_t i = 0; i < s; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      rhs(tmp.data(), k2.data(), work);
      for (std::size_t i = 0; i < s; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      rhs(tmp.data(), k3.data(), work);
      for (std::size_t i = 0; i < s; ++i) tmp[i] = y[i] + h * k3[i];
      rhs(tmp.data(), k4.data(), work);
      bool finite = true;
      for (std::size_t i = 0; i < s; ++i) {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        finite = finite && std::isfinite(y[i]);
      }
      if (!finite)
        throw BlowUpError("wave integrator: non-finite state", t0 + double(step + 1) * h);
    }
  }

  std::vector<double> pack(const PhasePoint& x) const {
    std::vector<double> y(2 * n_);
    std::copy(x.position().begin(), x.position().end(), y.begin());
    std::copy(x.velocity().begin(), x.velocity().end(), y.begin() + long(n_));
    return y;
  }

  PhasePoint unpack(const std::vector<double>& y) const {
    return PhasePoint(std::vector<double>(y.begin(), y.begin() + long(n_)),
                      std::vector<double>(y.begin() + long(n_), y.end()));
  }

 private:
  static double horner(const std::vector<double>& c, double s) noexcept {
    double r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * s + *it;
    return r;
  }

  void check(const PhasePoint& x) const {
    if (x.mode_count() != n_)
      throw DimensionError("wave system: state has " + std::to_string(x.mode_count()) +
                           " modes, config has " + std::to_string(n_));
  }

  WaveSystemConfig cfg_;
  MetricSpec metric_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  double weight_ = 0.0;
  std::vector<double> basis_;  // M x N, row-major
  std::vector<double> h_;
  std::vector<std::vector<double>> kernel_;
  std::vector<double> f_;
  std::vector<double> antiderivative_;
};

inline PhasePoint wave_rhs(const PhasePoint& state, const WaveSystemConfig& cfg) {
  return WaveGalerkin(cfg).rhs(state);
}

inline Energy lyapunov(const PhasePoint& state, const WaveSystemConfig& cfg) {
  return WaveGalerkin(cfg).lyapunov(state);
}

inline constexpr std::size_t kMaxSteps = 100'000'000;

// Number of steps covering `t` with steps no longer than dt. A t within
// roundoff of an integer multiple of dt uses exactly dt.
inline std::size_t step_count(double t, double dt) {
  const double q = t / dt;
  const double r = std::round(q);
  const double steps = std::abs(q - r) <= 1e-9 * std::max(1.0, q) ? r : std::ceil(q);
  if (!(steps <= double(kMaxSteps)))
    throw NumericalError("horizon " + std::to_string(t) + " needs more than " +
                         std::to_string(kMaxSteps) + " steps of dt = " + std::to_string(dt));
  return std::size_t(steps);
}

/// Fixed-step RK4 solution operator S(t) of the Galerkin system.
class WaveSemigroup {
 public:
  explicit WaveSemigroup(WaveSystemConfig cfg) : engine_(std::move(cfg)) {}

  PhasePoint advance(const PhasePoint& x, double t) const {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("advance: t must be >= 0");
    if (x.mode_count() != engine_.mode_count()) throw DimensionError("advance: mode mismatch");
    if (t == 0.0) return x;
    const std::size_t steps = step_count(t, engine_.config().dt);
    auto y = engine_.pack(x);
    engine_.rk4(y, steps, t / double(steps), 0.0);
    return engine_.unpack(y);
  }

  const MetricSpec& metric() const noexcept { return engine_.metric(); }
  double time_quantum() const noexcept { return engine_.config().dt; }
  const WaveGalerkin& engine() const noexcept { return engine_; }
  const WaveSystemConfig& config() const noexcept { return engine_.config(); }

 private:
  WaveGalerkin engine_;
};

struct EnergySample {
  double t;
  double E;
  double L;
};

struct TrajectoryRecord {
  WaveSystemConfig config;
  PhasePoint initial;
  std::vector<std::pair<double, PhasePoint>> samples;
  std::vector<EnergySample> energy_samples;

  const PhasePoint& final_state() const { return samples.back().second; }
};

inline bool is_multiple_of(double value, double quantum) {
  const double q = value / quantum;
  return q >= 1.0 - 1e-9 && std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q);
}

// Integrate to `horizon`, recording state and energies every `sample_every`
// (a positive multiple of dt). The horizon is always the last sample.
inline TrajectoryRecord evolve(const PhasePoint& initial, const WaveSystemConfig& cfg,
                               double horizon, double sample_every) {
  const WaveGalerkin engine(cfg);
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ConfigError("evolve: horizon must be >= 0");
  if (!(sample_every > 0.0) || !is_multiple_of(sample_every, cfg.dt))
    throw ConfigError("evolve: sample_every must be a positive multiple of dt");
  if (initial.mode_count() != cfg.mode_count) throw DimensionError("evolve: mode mismatch");
  const std::size_t total = step_count(horizon, cfg.dt);
  const std::size_t per_sample = std::size_t(std::llround(sample_every / cfg.dt));

  TrajectoryRecord rec{cfg, initial, {}, {}};
  auto record = [&](double t, const PhasePoint& x) {
    rec.samples.emplace_back(t, x);
    const Energy e = engine.lyapunov(x);
    rec.energy_samples.push_back({t, e.E, e.L});
  };
  record(0.0, initial);
  if (total == 0) return rec;
  const double h = horizon / double(total);
  auto y = engine.pack(initial);
  std::size_t done = 0;
  while (done < total) {
    const std::size_t chunk = std::min(per_sample, total - done);
    engine.rk4(y, chunk, h, double(done) * h);
    done += chunk;
    record(done == total ? horizon : double(done) * h, engine.unpack(y));
  }
  return rec;
}

}  // namespace attractor_lab
