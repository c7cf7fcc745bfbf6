#pragma once

// CSV and JSON persistence. Doubles are printed with std::to_chars (shortest
// form that round-trips), so identical values always give identical bytes.

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>  // vendored nlohmann::json

#include "attracting_set.hpp"
#include "cover.hpp"
#include "decay_law.hpp"
#include "error.hpp"
#include "phase_space.hpp"
#include "wave_system.hpp"

namespace attractor_lab {

namespace fs = std::filesystem;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::string_view what = "value") {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "nan") return NAN;
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("cannot parse " + std::string(what) + " '" + std::string(s) + "' as a number");
  return v;
}

// ---------------------------------------------------------------------------
// Plain CSV tables (no quoting: every field here is a number or an identifier)

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ConfigError("CSV has no column '" + std::string(name) + "'");
  }
};

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line, ',');
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = split(line, ',');
    if (row.size() != t.header.size())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields, got " + std::to_string(row.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot write " + path.string());
  }

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((emit(fields, first)), ...);
    out_ << '\n';
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw ConfigError("failed writing " + path_.string());
  }

 private:
  void emit(double v, bool& first) { sep(first), out_ << format_double(v); }
  void emit(std::size_t v, bool& first) { sep(first), out_ << v; }
  void emit(int v, bool& first) { sep(first), out_ << v; }
  void emit(std::string_view v, bool& first) { sep(first), out_ << v; }
  void emit(const char* v, bool& first) { sep(first), out_ << v; }
  void emit(const std::string& v, bool& first) { sep(first), out_ << v; }
  void emit(const std::vector<double>& v, bool& first) {
    for (double x : v) emit(x, first);
  }
  void emit(const PhasePoint& x, bool& first) {
    emit(x.position(), first);
    emit(x.velocity(), first);
  }
  void sep(bool& first) {
    if (!first) out_ << ',';
    first = false;
  }

  fs::path path_;
  std::ofstream out_;
};

// "a_1,...,a_N,b_1,...,b_N" with an optional column-name prefix.
inline std::vector<std::string> coefficient_header(std::size_t n, std::string_view prefix = {}) {
  std::vector<std::string> h;
  for (const char* c : {"a_", "b_"})
    for (std::size_t j = 1; j <= n; ++j) h.push_back(std::string(prefix) + c + std::to_string(j));
  return h;
}

inline PhasePoint point_from_fields(const std::vector<std::string>& row, std::size_t first, std::size_t n) {
  std::vector<double> a(n), b(n);
  for (std::size_t j = 0; j < n; ++j) {
    a[j] = parse_double(row.at(first + j), "coefficient");
    b[j] = parse_double(row.at(first + n + j), "coefficient");
  }
  return PhasePoint(std::move(a), std::move(b));
}

inline std::size_t count_modes(const std::vector<std::string>& header, std::string_view prefix = {}) {
  std::size_t n = 0;
  while (std::find(header.begin(), header.end(), std::string(prefix) + "a_" + std::to_string(n + 1)) != header.end()) ++n;
  if (n == 0) throw ConfigError("CSV has no coefficient columns");
  return n;
}

// ---------------------------------------------------------------------------
// Domain records

inline void write_decay_trace(const fs::path& path, const DecayTrace& tr) {
  tr.validate();
  CsvWriter w(path);
  w.row("t", "value", "quantity", "m_clusters");
  for (std::size_t i = 0; i < tr.size(); ++i) w.row(tr.times[i], tr.values[i], to_string(tr.quantity), tr.m_clusters);
  w.close();
}

inline DecayTrace read_decay_trace(const fs::path& path) {
  const auto t = read_csv(path);
  const auto ct = t.column("t"), cv = t.column("value");
  DecayTrace tr;
  bool have_meta = false;
  for (const auto& r : t.rows) {
    tr.times.push_back(parse_double(r[ct], "t"));
    tr.values.push_back(parse_double(r[cv], "value"));
    if (!have_meta) {
      tr.quantity = parse_trace_quantity(r[t.column("quantity")]);
      tr.m_clusters = std::size_t(parse_double(r[t.column("m_clusters")], "m_clusters"));
      have_meta = true;
    }
  }
  tr.validate();
  return tr;
}

inline void write_trajectory(const fs::path& path, const TrajectoryRecord& rec) {
  CsvWriter w(path);
  std::vector<std::string> h{"t"};
  const auto coeffs = coefficient_header(rec.config.mode_count);
  h.insert(h.end(), coeffs.begin(), coeffs.end());
  h.push_back("E");
  h.push_back("L");
  w.row(h);
  for (std::size_t i = 0; i < rec.samples.size(); ++i)
    w.row(rec.samples[i].first, rec.samples[i].second, rec.energy_samples[i].E, rec.energy_samples[i].L);
  w.close();
}

inline void write_ensemble(const fs::path& path, const Ensemble& e) {
  CsvWriter w(path);
  w.row(coefficient_header(e.mode_count()));
  for (const auto& x : e) w.row(x);
  w.close();
}

inline Ensemble read_ensemble(const fs::path& path) {
  const auto t = read_csv(path);
  const std::size_t n = count_modes(t.header);
  std::vector<PhasePoint> pts;
  for (const auto& r : t.rows) pts.push_back(point_from_fields(r, t.column("a_1"), n));
  return Ensemble(std::move(pts), path.stem().string());
}

inline void write_certificate(const fs::path& path, const AttractionCertificate& c) {
  CsvWriter w(path);
  w.row("t", "measured", "bound", "satisfied");
  for (std::size_t i = 0; i < c.times.size(); ++i)
    w.row(c.times[i], c.measured[i], c.bound[i], c.measured[i] <= c.bound[i] ? 1 : 0);
  w.close();
}

inline nlohmann::json law_to_json(const DecayLaw& law) {
  return {{"kind", std::string(to_string(law.kind()))},
          {"amplitude", law.amplitude()},
          {"rate", law.rate()},
          {"shift", law.shift()}};
}

inline DecayLaw law_from_json(const nlohmann::json& j) {
  try {
    return DecayLaw(parse_decay_kind(j.at("kind").get<std::string>()), j.at("amplitude").get<double>(),
                    j.at("rate").get<double>(), j.value("shift", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed decay law: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Checksums

inline std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string() + " for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("SHA-256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), std::size_t(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

// Sorted relative paths of every regular file below `dir`.
inline std::vector<fs::path> list_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  std::sort(out.begin(), out.end());
  return out;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing " + path.string());
}

inline nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Attracting-set directory: net.csv, orbits.csv, proxy.csv, manifest.json

inline void save_attracting_set(const fs::path& dir, const AttractingSetApprox& a,
                                const nlohmann::json& config_echo = nlohmann::json::object()) {
  fs::create_directories(dir);
  const std::size_t n = a.attractor_proxy.mode_count();
  {
    CsvWriter w(dir / "net.csv");
    std::vector<std::string> h{"m"};
    for (const char* p : {"seed_", "evolved_"}) {
      const auto c = coefficient_header(n, p);
      h.insert(h.end(), c.begin(), c.end());
    }
    w.row(h);
    for (const auto& e : a.net_entries) w.row(e.birth_time, e.seed, e.evolved);
    w.close();
  }
  {
    CsvWriter w(dir / "orbits.csv");
    std::vector<std::string> h{"net_index", "tau"};
    const auto c = coefficient_header(n);
    h.insert(h.end(), c.begin(), c.end());
    w.row(h);
    for (std::size_t i = 0; i < a.orbits.size(); ++i)
      for (const auto& [tau, x] : a.orbits[i]) w.row(i, tau, x);
    w.close();
  }
  write_ensemble(dir / "proxy.csv", a.attractor_proxy);
  nlohmann::json j;
  j["law"] = law_to_json(a.law);
  j["m_min"] = a.m_min;
  j["m_max"] = a.m_max;
  j["orbit_horizon"] = a.orbit_horizon;
  j["orbit_sample_every"] = a.orbit_sample_every;
  j["mode_count"] = n;
  j["net_size"] = a.net_entries.size();
  j["config"] = config_echo;
  write_json(dir / "manifest.json", j);
}

inline AttractingSetApprox load_attracting_set(const fs::path& dir) {
  const auto j = read_json(dir / "manifest.json");
  AttractingSetApprox a{{}, {}, read_ensemble(dir / "proxy.csv"), law_from_json(j.at("law"))};
  try {
    a.m_min = j.at("m_min").get<int>();
    a.m_max = j.at("m_max").get<int>();
    a.orbit_horizon = j.at("orbit_horizon").get<double>();
    a.orbit_sample_every = j.at("orbit_sample_every").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed attracting-set manifest: ") + e.what());
  }
  const std::size_t n = a.attractor_proxy.mode_count();
  const auto net = read_csv(dir / "net.csv");
  for (const auto& r : net.rows)
    a.net_entries.push_back({int(parse_double(r[0], "m")), point_from_fields(r, 1, n), point_from_fields(r, 1 + 2 * n, n)});
  const auto orb = read_csv(dir / "orbits.csv");
  a.orbits.resize(a.net_entries.size());
  for (const auto& r : orb.rows) {
    const auto i = std::size_t(parse_double(r[0], "net_index"));
    if (i >= a.orbits.size()) throw ConfigError("orbits.csv references unknown net point " + r[0]);
    a.orbits[i].emplace_back(parse_double(r[1], "tau"), point_from_fields(r, 2, n));
  }
  return a;
}

}  // namespace attractor_lab
