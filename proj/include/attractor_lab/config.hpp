#pragma once

// Structured key-value configuration files.
//
//   # comment (also allowed after a value)
//   key = value
//   f_coeffs = 0, -1, 0, 1          comma-separated list
//   kernel_vectors = 1, 0.5; 0, 1   lists of vectors separated by ';'
//   t_grid = 0:0.5:20               inclusive start:step:stop grid
//
// Numbers accept scientific notation. Every key must be consumed by the
// reader; leftovers are reported as unknown keys.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>  // vendored nlohmann::json

#include "error.hpp"
#include "io.hpp"
#include "linear_modal.hpp"
#include "wave_system.hpp"

namespace attractor_lab {

class KeyValues {
 public:
  static KeyValues parse(std::string_view text, std::string source = "<config>") {
    KeyValues kv;
    kv.source_ = std::move(source);
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw ConfigError(kv.where(lineno) + ": expected 'key = value', got '" + body + "'");
      const std::string key = trim(body.substr(0, eq));
      if (key.empty()) throw ConfigError(kv.where(lineno) + ": empty key");
      if (kv.values_.count(key)) throw ConfigError(kv.where(lineno) + ": duplicate key '" + key + "'");
      kv.values_[key] = trim(body.substr(eq + 1));
      kv.lines_[key] = lineno;
    }
    return kv;
  }

  static KeyValues load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::string str(const std::string& key) const { return raw(key); }
  std::string str(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
  }

  double num(const std::string& key) const { return parse_number(key, raw(key)); }
  double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

  std::uint64_t integer(const std::string& key) const {
    const double v = num(key);
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.007199254740992e15)
      throw ConfigError(context(key) + ": expected a non-negative integer");
    return std::uint64_t(v);
  }
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  // Comma list or start:step:stop grid.
  std::vector<double> list(const std::string& key) const {
    const std::string v = raw(key);
    if (v.find(':') != std::string::npos) return grid(key, v);
    std::vector<double> out;
    if (trim(v).empty()) return out;
    for (const auto& item : split(v, ',')) out.push_back(parse_number(key, item));
    return out;
  }
  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? list(key) : fallback;
  }

  std::vector<std::vector<double>> vectors(const std::string& key) const {
    std::vector<std::vector<double>> out;
    const std::string v = raw(key);
    if (trim(v).empty()) return out;
    for (const auto& part : split(v, ';')) {
      std::vector<double> vec;
      for (const auto& item : split(part, ',')) vec.push_back(parse_number(key, item));
      out.push_back(std::move(vec));
    }
    return out;
  }

  // Throws if any key was never read.
  void require_all_used() const {
    std::string unknown;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
    if (!unknown.empty()) throw ConfigError(source_ + ": unknown or unused keys: " + unknown);
  }

  nlohmann::json echo() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

  const std::string& source() const noexcept { return source_; }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

  std::string where(int lineno) const { return source_ + ":" + std::to_string(lineno); }

  std::string context(const std::string& key) const {
    const auto it = lines_.find(key);
    return (it == lines_.end() ? source_ : where(it->second)) + ": key '" + key + "'";
  }

  const std::string& raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  double parse_number(const std::string& key, const std::string& text) const {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError(context(key) + ": empty number");
    try {
      const double v = parse_double(t, "number");
      if (!std::isfinite(v)) throw ConfigError("non-finite");
      return v;
    } catch (const ConfigError&) {
      throw ConfigError(context(key) + ": '" + t + "' is not a finite number");
    }
  }

  std::vector<double> grid(const std::string& key, const std::string& v) const {
    const auto parts = split(v, ':');
    if (parts.size() != 3) throw ConfigError(context(key) + ": grid must be start:step:stop");
    const double start = parse_number(key, parts[0]);
    const double step = parse_number(key, parts[1]);
    const double stop = parse_number(key, parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError(context(key) + ": grid needs step > 0 and stop >= start");
    const auto count = std::size_t(std::floor((stop - start) / step + 1e-9)) + 1;
    if (count > 10'000'000) throw ConfigError(context(key) + ": grid too large");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = start + double(i) * step;
    return out;
  }

  std::string source_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  mutable std::set<std::string> used_;
};

inline const std::vector<std::string>& wave_config_keys() {
  static const std::vector<std::string> keys{"k",        "p",          "l",  "f_coeffs",
                                             "kernel_weights", "kernel_vectors", "h_coeffs",
                                             "mode_count", "dt",       "collocation_points"};
  return keys;
}

inline WaveSystemConfig read_wave_config(const KeyValues& kv) {
  WaveSystemConfig c;
  c.k = kv.num("k", c.k);
  c.p = kv.num("p", c.p);
  c.l = kv.num("l", c.l);
  c.f_coeffs = kv.list("f_coeffs", {});
  c.kernel_weights = kv.list("kernel_weights", {});
  if (kv.has("kernel_vectors")) c.kernel_vectors = kv.vectors("kernel_vectors");
  c.h_coeffs = kv.list("h_coeffs", {});
  c.mode_count = kv.integer("mode_count", c.mode_count);
  c.dt = kv.num("dt", c.dt);
  c.collocation_points = kv.integer("collocation_points", 0);
  c.validate();
  return c;
}

inline LinearModalConfig read_linear_config(const KeyValues& kv) {
  const auto n = kv.integer("mode_count", 16);
  if (n < 1) throw ConfigError("mode_count must be >= 1");
  const std::string geometry = kv.str("geometry", "interval");
  LinearModalConfig c;
  c.damping = kv.num("l", 1.0);
  if (geometry == "interval")
    c.metric = MetricSpec::interval(n);
  else if (geometry == "rectangle")
    c.metric = MetricSpec::rectangle(n);
  else
    throw ConfigError("geometry must be 'interval' or 'rectangle', got '" + geometry + "'");
  c.validate();
  return c;
}

}  // namespace attractor_lab
