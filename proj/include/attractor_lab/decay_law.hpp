#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "error.hpp"

namespace attractor_lab {

enum class DecayKind { exponential, polynomial, log_polynomial };

inline std::string_view to_string(DecayKind k) {
  switch (k) {
    case DecayKind::exponential: return "exponential";
    case DecayKind::polynomial: return "polynomial";
    case DecayKind::log_polynomial: return "log_polynomial";
  }
  return "?";
}

inline DecayKind parse_decay_kind(std::string_view s) {
  if (s == "exponential") return DecayKind::exponential;
  if (s == "polynomial") return DecayKind::polynomial;
  if (s == "log_polynomial") return DecayKind::log_polynomial;
  throw ConfigError("unknown decay law kind '" + std::string(s) + "'");
}

/// Strictly decreasing decay function phi with phi(t) -> 0.
///
/// With s = t - shift:
///   exponential     C * exp(-beta * s)     any real s
///   polynomial      C * s^(-beta)          s > 0
///   log_polynomial  C * (ln s)^(-beta)     s > 1
class DecayLaw {
 public:
  DecayLaw(DecayKind kind, double amplitude, double rate, double shift = 0.0)
      : kind_(kind), amplitude_(amplitude), rate_(rate), shift_(shift) {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
      throw ConfigError("DecayLaw: amplitude must be positive");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError("DecayLaw: rate must be positive");
    if (!(shift >= 0.0) || !std::isfinite(shift))
      throw ConfigError("DecayLaw: shift must be nonnegative");
  }

  static DecayLaw exponential(double c, double beta) { return {DecayKind::exponential, c, beta}; }
  static DecayLaw polynomial(double c, double beta) { return {DecayKind::polynomial, c, beta}; }
  static DecayLaw log_polynomial(double c, double beta) {
    return {DecayKind::log_polynomial, c, beta};
  }

  DecayKind kind() const noexcept { return kind_; }
  double amplitude() const noexcept { return amplitude_; }
  double rate() const noexcept { return rate_; }
  double shift() const noexcept { return shift_; }

  // Infimum of the domain (exclusive); -inf for the exponential law.
  double domain_start() const noexcept {
    switch (kind_) {
      case DecayKind::exponential: return -INFINITY;
      case DecayKind::polynomial: return shift_;
      case DecayKind::log_polynomial: return shift_ + 1.0;
    }
    return 0.0;
  }

  bool in_domain(double t) const noexcept {
    return std::isfinite(t) && (kind_ == DecayKind::exponential || t > domain_start());
  }

  double operator()(double t) const { return eval(t); }

  double eval(double t) const {
    if (!in_domain(t))
      throw DomainError("DecayLaw(" + std::string(to_string(kind_)) + "): t = " +
                        std::to_string(t) + " outside domain");
    const double s = t - shift_;
    switch (kind_) {
      case DecayKind::exponential: return amplitude_ * std::exp(-rate_ * s);
      case DecayKind::polynomial: return amplitude_ * std::pow(s, -rate_);
      case DecayKind::log_polynomial: return amplitude_ * std::pow(std::log(s), -rate_);
    }
    return 0.0;
  }

  // The t with eval(t) == value (value > 0).
  double inverse(double value) const {
    if (!(value > 0.0)) throw DomainError("DecayLaw::inverse: value must be positive");
    const double q = value / amplitude_;
    switch (kind_) {
      case DecayKind::exponential: return shift_ - std::log(q) / rate_;
      case DecayKind::polynomial: return shift_ + std::pow(q, -1.0 / rate_);
      case DecayKind::log_polynomial: return shift_ + std::exp(std::pow(q, -1.0 / rate_));
    }
    return 0.0;
  }

  DecayLaw scaled(double factor) const { return {kind_, amplitude_ * factor, rate_, shift_}; }

 private:
  DecayKind kind_;
  double amplitude_;
  double rate_;
  double shift_;
};

}  // namespace attractor_lab
