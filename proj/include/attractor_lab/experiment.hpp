#pragma once

// Config-driven experiment pipelines with reproducibility manifests.
//
// Every run writes its CSV outputs into output_dir and then, last,
// manifest.json with the config echo, wall-clock time, headline numbers and
// a SHA-256 inventory of every other file in the directory. A run that fails
// still writes a manifest (status "failed") before the error propagates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>  // vendored nlohmann::json

#include "attracting_set.hpp"
#include "config.hpp"
#include "cover.hpp"
#include "criteria.hpp"
#include "error.hpp"
#include "io.hpp"
#include "linear_modal.hpp"
#include "sampling.hpp"
#include "semigroup.hpp"
#include "wave_system.hpp"

namespace attractor_lab {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum class ExperimentKind { oracle_decay, wave_attractor, sweep_l, quasistability, criteria_suite };
enum class SystemKind { linear, wave };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::oracle_decay: return "oracle_decay";
    case ExperimentKind::wave_attractor: return "wave_attractor";
    case ExperimentKind::sweep_l: return "sweep_l";
    case ExperimentKind::quasistability: return "quasistability";
    case ExperimentKind::criteria_suite: return "criteria_suite";
  }
  return "?";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
  for (auto k : {ExperimentKind::oracle_decay, ExperimentKind::wave_attractor, ExperimentKind::sweep_l,
                 ExperimentKind::quasistability, ExperimentKind::criteria_suite})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + std::string(s) + "'");
}

inline std::string_view to_string(SystemKind s) { return s == SystemKind::linear ? "linear" : "wave"; }

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::oracle_decay;
  SystemKind system = SystemKind::linear;
  WaveSystemConfig wave;
  LinearModalConfig linear;
  EnsembleSpec ensemble;
  std::size_t fresh_points = 20;

  std::vector<double> t_grid;
  std::vector<double> verify_grid;  // empty: t_grid restricted to the covered window
  int m_min = 1;
  int m_max = 4;
  std::vector<double> l_values;
  ExperimentKind sweep_kind = ExperimentKind::wave_attractor;

  double burn_in = 10.0;
  double window = 10.0;
  double sample_every = 0.1;
  double orbit_horizon = 20.0;
  double orbit_sample_every = 0.5;
  std::size_t m_clusters = 2;
  double fit_floor = 1e-10;

  double period = 0.0;  // <= 0: 3 / l
  std::size_t n_periods = 8;
  std::size_t low_mode_threshold = 4;
  double closeness = 0.0;
  std::size_t tail_modes = 4;

  double min_satisfied_fraction = 0.95;
  std::filesystem::path output_dir = "out";
  nlohmann::json echo = nlohmann::json::object();

  double damping() const { return system == SystemKind::wave ? wave.l : linear.damping; }

  MetricSpec metric() const { return system == SystemKind::wave ? wave.metric() : linear.metric; }

  void set_damping(double l) {
    if (system == SystemKind::wave)
      wave.l = l;
    else
      linear.damping = l;
    echo["l"] = format_double(l);
  }

  void validate() const {
    ensemble.validate();
    if (system == SystemKind::wave) wave.validate(); else linear.validate();
    if (kind != ExperimentKind::sweep_l && kind != ExperimentKind::quasistability && t_grid.empty())
      throw ConfigError("t_grid must be nonempty");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
      if (!(t_grid[i] > t_grid[i - 1])) throw ConfigError("t_grid must be strictly increasing");
    if (!t_grid.empty() && t_grid.front() < 0.0) throw ConfigError("t_grid must be >= 0");
    if (kind == ExperimentKind::sweep_l && l_values.empty()) throw ConfigError("l_values must be nonempty");
    if (m_min < 1 || m_max < m_min) throw ConfigError("m_range must satisfy 1 <= m_min <= m_max");
    if (m_clusters < 1) throw ConfigError("m_clusters must be >= 1");
    if (fresh_points < 1) throw ConfigError("fresh_points must be >= 1");
    if (!(fit_floor >= 0.0)) throw ConfigError("fit_floor must be >= 0");
    if (!(min_satisfied_fraction >= 0.0 && min_satisfied_fraction <= 1.0))
      throw ConfigError("min_satisfied_fraction must lie in [0, 1]");
    if (output_dir.empty()) throw ConfigError("output_dir must be set");
  }
};

inline ExperimentConfig read_experiment_config(const KeyValues& kv) {
  ExperimentConfig c;
  c.kind = parse_experiment_kind(kv.str("kind"));
  const std::string default_system = c.kind == ExperimentKind::oracle_decay ? "linear" : "wave";
  const std::string system = kv.str("system", default_system);
  if (system == "linear") {
    c.system = SystemKind::linear;
    c.linear = read_linear_config(kv);
    for (const auto& key : wave_config_keys())
      if (key != "l" && key != "mode_count" && kv.has(key))
        throw ConfigError("key '" + key + "' applies only to system = wave");
  } else if (system == "wave") {
    c.system = SystemKind::wave;
    c.wave = read_wave_config(kv);
  } else {
    throw ConfigError("system must be 'linear' or 'wave', got '" + system + "'");
  }

  c.ensemble.points = kv.integer("points", c.ensemble.points);
  c.ensemble.radius = kv.num("radius", c.ensemble.radius);
  c.ensemble.seed = kv.integer("seed", c.ensemble.seed);
  c.ensemble.active_modes = kv.integer("active_modes", 0);
  c.ensemble.pair_jitter = kv.num("pair_jitter", c.kind == ExperimentKind::quasistability ? 0.02 : 0.0);
  c.fresh_points = kv.integer("fresh_points", c.fresh_points);

  if (c.kind != ExperimentKind::sweep_l || kv.has("t_grid")) c.t_grid = kv.list("t_grid", {});
  c.verify_grid = kv.list("verify_grid", {});
  if (kv.has("m_range")) {
    const auto r = kv.list("m_range");
    if (r.size() != 2 || r[0] != std::floor(r[0]) || r[1] != std::floor(r[1]))
      throw ConfigError("m_range must be two integers 'm_min, m_max'");
    c.m_min = int(r[0]);
    c.m_max = int(r[1]);
  }
  c.l_values = kv.list("l_values", {});
  if (kv.has("sweep_kind")) {
    c.sweep_kind = parse_experiment_kind(kv.str("sweep_kind"));
    if (c.sweep_kind == ExperimentKind::sweep_l) throw ConfigError("sweep_kind cannot be sweep_l");
  } else if (c.system == SystemKind::linear) {
    c.sweep_kind = ExperimentKind::oracle_decay;
  }

  c.burn_in = kv.num("burn_in", c.burn_in);
  c.window = kv.num("window", c.window);
  c.sample_every = kv.num("sample_every", c.sample_every);
  c.orbit_horizon = kv.num("orbit_horizon", c.orbit_horizon);
  c.orbit_sample_every = kv.num("orbit_sample_every", c.orbit_sample_every);
  c.m_clusters = kv.integer("m_clusters", c.kind == ExperimentKind::quasistability ? 4 : c.m_clusters);
  c.fit_floor = kv.num("fit_floor", c.fit_floor);
  c.period = kv.num("period", 0.0);
  c.n_periods = kv.integer("n_periods", c.n_periods);
  c.low_mode_threshold = kv.integer("low_mode_threshold", c.low_mode_threshold);
  c.closeness = kv.num("closeness", 0.0);
  c.tail_modes = kv.integer("tail_modes", c.tail_modes);
  c.min_satisfied_fraction = kv.num("min_satisfied_fraction", c.min_satisfied_fraction);
  c.output_dir = kv.str("output_dir", "out");
  c.echo = kv.echo();
  kv.require_all_used();
  c.validate();
  return c;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return read_experiment_config(KeyValues::load(path));
}

// Outcome of one pipeline: headline numbers and whether its acceptance
// thresholds were met. Files are already on disk when it is returned.
struct PipelineResult {
  nlohmann::json headline = nlohmann::json::object();
  bool thresholds_met = true;
};

struct RunManifest {
  nlohmann::json document;
  bool ok() const { return document.value("status", "") == "ok"; }
  bool thresholds_met() const { return document.value("thresholds_met", false); }
  const nlohmann::json& headline() const { return document.at("headline"); }
};

namespace detail {

template <class F>
decltype(auto) with_semigroup(const ExperimentConfig& c, F&& f) {
  if (c.system == SystemKind::wave) return f(WaveSemigroup(c.wave));
  return f(LinearModalSemigroup(c.linear));
}

inline nlohmann::json fit_json(const RateFit& f) {
  return {{"beta_hat", f.rate},       {"amplitude", f.amplitude}, {"r_squared", f.r_squared},
          {"t_lo", f.t_lo},           {"t_hi", f.t_hi},           {"samples_used", f.samples_used},
          {"floor", f.floor_used}};
}

inline void add_predictions(nlohmann::json& h, double l, const MetricSpec& m) {
  const auto p = predicted_rate_bounds(l, m);
  h["l"] = l;
  h["rate_58"] = p.rate_58;
  h["rate_59"] = p.rate_59;
  h["period_T"] = p.period_T;
  h["eta_predicted"] = p.eta;
}

// Evolves every snapshot time of t_grid once, in order.
template <Semigroup S>
std::vector<Snapshot> snapshots(const S& sg, const Ensemble& start, std::span<const double> t_grid) {
  std::vector<Snapshot> out;
  Ensemble cur = start;
  double now = 0.0;
  for (double t : t_grid) {
    cur = evolve_ensemble(sg, cur, t - now);
    now = t;
    out.push_back({t, cur});
  }
  return out;
}

inline DecayTrace semidist_trace(std::span<const Snapshot> snaps, std::span<const PhasePoint> target,
                                 const MetricSpec& m) {
  DecayTrace tr;
  tr.quantity = TraceQuantity::semidist;
  for (const auto& s : snaps) {
    tr.times.push_back(s.time);
    tr.values.push_back(hausdorff_semidist(s.ensemble.points(), target, m));
  }
  return tr;
}

struct Absorbed {
  double radius = 0.0;
  double t_enter = 0.0;
  Ensemble ensemble;
};

template <Semigroup S>
Absorbed absorb(const S& sg, const ExperimentConfig& c, const Ensemble& probe) {
  const auto rep = absorbing_radius(sg, probe, c.burn_in, c.window, c.sample_every);
  const double t_enter = rep.max_entering_time();
  if (!std::isfinite(t_enter))
    throw NumericalError("probe ensemble never settled inside the absorbing radius");
  return {rep.radius, t_enter, evolve_ensemble(sg, probe, t_enter, "absorbed")};
}

// Attraction law from the alpha trace of the absorbed sample: the fitted rate
// with an amplitude that dominates every sample. When the trace sits below
// the floor (already collapsed) the predicted rate stands in, with an
// amplitude that keeps every net radius above the floor.
struct LawChoice {
  DecayLaw law;
  std::optional<RateFit> fit;
};

inline LawChoice attraction_law(const DecayTrace& alpha, const ExperimentConfig& c, double rate_58) {
  try {
    const auto fit = fit_exponential_rate(alpha, c.fit_floor);
    return {upper_envelope_law(alpha, fit), fit};
  } catch (const NumericalError&) {
    double amp = 2.0 * kNetRadiusFloor * std::exp(rate_58 * double(c.m_max));
    for (std::size_t i = 0; i < alpha.size(); ++i)
      amp = std::max(amp, alpha.values[i] * std::exp(rate_58 * alpha.times[i]));
    return {DecayLaw::exponential(amp, rate_58), std::nullopt};
  }
}

inline std::vector<double> covered_grid(const ExperimentConfig& c, double t_star) {
  if (!c.verify_grid.empty()) return c.verify_grid;
  const double lo = t_star + 1.0 + double(c.m_min);
  std::vector<double> out;
  for (double t : c.t_grid)
    if (t >= lo - 1e-9 && t <= c.orbit_horizon + 1e-9) out.push_back(t);
  if (out.empty())
    throw ConfigError("no t_grid point lies in the covered window [" + format_double(lo) + ", " +
                      format_double(c.orbit_horizon) + "]; extend orbit_horizon or t_grid");
  return out;
}

inline EnsembleSpec fresh_spec(const ExperimentConfig& c) {
  EnsembleSpec s = c.ensemble;
  s.points = c.fresh_points;
  s.seed = c.ensemble.seed + 1;
  s.pair_jitter = 0.0;
  return s;
}

// ---------------------------------------------------------------------------
// Pipelines

template <Semigroup S>
PipelineResult run_oracle_decay(const S& sg, const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto& m = sg.metric();
  const Ensemble probe = sample_ensemble(c.ensemble, m, "probe");
  write_ensemble(out / "ensemble.csv", probe);
  const auto snaps = snapshots(sg, probe, c.t_grid);
  const std::vector<PhasePoint> origin{PhasePoint::zero(m.mode_count())};
  const DecayTrace semi = semidist_trace(snaps, origin, m);
  const DecayTrace alpha = decay_trace(snaps, c.m_clusters, m);
  write_decay_trace(out / "semidist_trace.csv", semi);
  write_decay_trace(out / "alpha_trace.csv", alpha);

  PipelineResult r;
  auto& h = r.headline;
  add_predictions(h, c.damping(), m);
  const RateFit fit = fit_exponential_rate(semi, c.fit_floor);
  h["fit"] = fit_json(fit);
  h["beta_hat"] = fit.rate;
  try {
    h["alpha_fit"] = fit_json(fit_exponential_rate(alpha, c.fit_floor));
  } catch (const NumericalError& e) {
    h["alpha_fit"] = e.what();
  }
  const double rate_58 = h["rate_58"].get<double>();
  r.thresholds_met = fit.rate >= 0.9 * rate_58;
  if (c.system == SystemKind::linear) {
    const double env = linear_modal_envelope_rate(c.linear);
    h["envelope_rate"] = env;
    h["relative_error"] = std::abs(fit.rate - env) / env;
    r.thresholds_met = r.thresholds_met && std::abs(fit.rate - env) <= 0.05 * env;
  }
  return r;
}

template <Semigroup S>
PipelineResult run_wave_attractor(const S& sg, const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto& m = sg.metric();
  PipelineResult r;
  auto& h = r.headline;
  add_predictions(h, c.damping(), m);
  const double rate_58 = h["rate_58"].get<double>();

  const Ensemble probe = sample_ensemble(c.ensemble, m, "probe");
  const Absorbed ab = absorb(sg, c, probe);
  write_ensemble(out / "absorbed.csv", ab.ensemble);
  h["absorbing_radius"] = ab.radius;
  h["absorb_time"] = ab.t_enter;

  const auto snaps = snapshots(sg, ab.ensemble, c.t_grid);
  const DecayTrace alpha = decay_trace(snaps, c.m_clusters, m);
  write_decay_trace(out / "alpha_trace.csv", alpha);
  const LawChoice law = attraction_law(alpha, c, rate_58);
  if (law.fit) {
    h["fit"] = fit_json(*law.fit);
    h["beta_hat"] = law.fit->rate;
  } else {
    h["fit"] = "alpha trace below fit_floor; predicted rate used";
    h["beta_hat"] = nullptr;
  }
  h["law"] = law_to_json(law.law);

  const auto aset = build_attracting_set(sg, ab.ensemble, c.m_min, c.m_max, law.law, c.orbit_horizon,
                                         c.orbit_sample_every);
  nlohmann::json run_info = {{"config", c.echo}, {"absorbing_radius", ab.radius}};
  save_attracting_set(out / "attractor", aset, run_info);
  h["net_size"] = aset.net_entries.size();

  const Ensemble fresh = sample_ensemble(fresh_spec(c), m, "fresh");
  const auto enter = entering_times(sg, fresh, ab.radius, c.burn_in + c.window, c.sample_every);
  const double t_star = *std::max_element(enter.begin(), enter.end());
  if (!std::isfinite(t_star)) throw NumericalError("fresh ensemble never entered the absorbing radius");
  const auto grid = covered_grid(c, t_star);
  const auto cert = verify_attraction(sg, aset, fresh, t_star, grid);
  write_certificate(out / "certificate.csv", cert);
  h["t_star"] = t_star;
  h["verify_window"] = {grid.front(), grid.back()};
  h["satisfied_fraction"] = cert.satisfied_fraction;

  const auto target = aset.all_points();
  const DecayTrace semi = semidist_trace(snaps, target, m);
  write_decay_trace(out / "semidist_trace.csv", semi);

  r.thresholds_met = cert.satisfied_fraction >= c.min_satisfied_fraction &&
                     (!law.fit || law.fit->rate >= 0.9 * rate_58);
  return r;
}

template <Semigroup S>
PipelineResult run_quasistability(const S& sg, const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto& m = sg.metric();
  const Ensemble probe = sample_ensemble(c.ensemble, m, "probe");
  write_ensemble(out / "ensemble.csv", probe);
  const double l = c.damping();
  const double period = c.period > 0.0 ? c.period : 3.0 / l;
  QuasiStabilityOptions opt;
  opt.low_mode_threshold = c.low_mode_threshold;
  opt.closeness = c.closeness;
  opt.m_clusters = c.m_clusters;
  opt.damping = l;
  const auto rep = quasistability_estimate(sg, probe, period, c.n_periods, opt);

  CsvWriter w(out / "quasistability.csv");
  w.row(std::vector<std::string>{"n", "alpha_ratio", "predicted_bound"});
  bool within = true;
  for (std::size_t n = 0; n < rep.per_period_alpha_ratios.size(); ++n) {
    w.row(n + 1, rep.per_period_alpha_ratios[n], rep.predicted_bounds[n]);
    within = within && rep.per_period_alpha_ratios[n] <= 1.15 * rep.predicted_bounds[n];
  }
  w.close();

  PipelineResult r;
  auto& h = r.headline;
  add_predictions(h, l, m);
  h["period"] = rep.period;
  h["eta_hat"] = rep.eta_hat;
  h["eta_predicted"] = rep.eta_predicted;
  h["pair_count"] = rep.pair_count;
  h["excluded_pairs"] = rep.excluded_pairs;
  h["closeness_threshold"] = rep.threshold;
  h["per_period_alpha_ratios"] = rep.per_period_alpha_ratios;
  h["predicted_bounds"] = rep.predicted_bounds;
  h["ratios_within_bound"] = within;
  r.thresholds_met = within && rep.eta_hat < 1.0;
  return r;
}

template <Semigroup S>
PipelineResult run_criteria_suite(const S& sg, const ExperimentConfig& c, const std::filesystem::path& out) {
  const auto& m = sg.metric();
  PipelineResult r;
  auto& h = r.headline;
  add_predictions(h, c.damping(), m);
  const double rate_58 = h["rate_58"].get<double>();

  const Ensemble probe = sample_ensemble(c.ensemble, m, "probe");
  const Absorbed ab = absorb(sg, c, probe);
  write_ensemble(out / "absorbed.csv", ab.ensemble);
  const auto snaps = snapshots(sg, ab.ensemble, c.t_grid);
  const DecayTrace alpha = decay_trace(snaps, c.m_clusters, m);
  write_decay_trace(out / "alpha_trace.csv", alpha);
  const LawChoice alpha_law = attraction_law(alpha, c, rate_58);
  h["alpha_law"] = law_to_json(alpha_law.law);

  // Candidate compact set: the absorbed sample pushed far past the grid.
  const Ensemble candidate = evolve_ensemble(sg, ab.ensemble, 2.0 * std::max(c.t_grid.back(), c.orbit_horizon),
                                             "candidate");
  const DecayTrace semi = semidist_trace(snaps, candidate.points(), m);
  write_decay_trace(out / "semidist_trace.csv", semi);
  const LawChoice semi_law = attraction_law(semi, c, rate_58);
  h["semidist_law"] = law_to_json(semi_law.law);
  const auto haus = check_hausdorff_criterion(sg, candidate, ab.ensemble, c.t_grid, semi_law.law, c.m_clusters);
  {
    CsvWriter w(out / "hausdorff_criterion.csv");
    w.row(std::vector<std::string>{"t", "semidist", "bound", "alpha", "alpha_bound", "satisfied", "alpha_within"});
    for (const auto& row : haus.rows)
      w.row(row.t, row.measured, row.bound, row.alpha, row.alpha_bound, int(row.satisfied), int(row.alpha_within));
    w.close();
  }
  h["hausdorff_satisfied_fraction"] = haus.satisfied_fraction;
  h["hausdorff_alpha_within_fraction"] = haus.alpha_within_fraction;

  if (c.tail_modes < m.mode_count()) {
    const DecayTrace tail = tail_projection_decay(sg, ab.ensemble, c.tail_modes, c.t_grid);
    write_decay_trace(out / "tail_trace.csv", tail);
    try {
      h["tail_fit"] = fit_json(fit_exponential_rate(tail, c.fit_floor));
    } catch (const NumericalError& e) {
      h["tail_fit"] = e.what();
    }
  }

  std::vector<std::pair<PhasePoint, PhasePoint>> pairs;
  for (std::size_t i = 0; i < ab.ensemble.size(); ++i)
    for (std::size_t j = i + 1; j < ab.ensemble.size(); ++j) pairs.emplace_back(ab.ensemble[i], ab.ensemble[j]);
  const auto contr = contractive_inequality_check(sg, std::span<const std::pair<PhasePoint, PhasePoint>>(pairs),
                                                  c.t_grid, alpha_law.law, c.m_clusters);
  {
    CsvWriter w(out / "contractive.csv");
    w.row(std::vector<std::string>{"t", "max_residual", "liminf", "alpha", "alpha_bound", "conclusion_holds"});
    for (const auto& row : contr.rows)
      w.row(row.t, *std::max_element(row.residuals.begin(), row.residuals.end()), row.liminf, row.alpha,
            row.alpha_bound, int(row.conclusion_holds));
    w.close();
  }
  h["contractive_conclusion_fraction"] = contr.conclusion_fraction;
  r.thresholds_met = haus.alpha_within_fraction >= c.min_satisfied_fraction &&
                     contr.conclusion_fraction >= c.min_satisfied_fraction;
  return r;
}

inline std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const BlowUpError*>(&e)) return "blow_up";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  return "other";
}

inline nlohmann::json inventory(const std::filesystem::path& dir) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& rel : list_files(dir)) {
    if (rel == "manifest.json") continue;
    files.push_back({{"path", rel.generic_string()},
                     {"sha256", sha256_file(dir / rel)},
                     {"bytes", std::filesystem::file_size(dir / rel)}});
  }
  return files;
}

struct SweepRow {
  double l = 0.0;
  std::optional<double> beta_hat;
  double rate_58 = NAN;
  double rate_59 = NAN;
  std::optional<double> satisfied_fraction;
  std::string status = "ok";
};

}  // namespace detail

// Runs a non-sweep pipeline directly into `out`; no manifest.
inline PipelineResult run_pipeline(const ExperimentConfig& c, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  return detail::with_semigroup(c, [&](const auto& sg) -> PipelineResult {
    switch (c.kind) {
      case ExperimentKind::oracle_decay: return detail::run_oracle_decay(sg, c, out);
      case ExperimentKind::wave_attractor: return detail::run_wave_attractor(sg, c, out);
      case ExperimentKind::quasistability: return detail::run_quasistability(sg, c, out);
      case ExperimentKind::criteria_suite: return detail::run_criteria_suite(sg, c, out);
      case ExperimentKind::sweep_l: break;
    }
    throw ConfigError("run_pipeline: sweep_l is not a single pipeline");
  });
}

struct SweepTable {
  std::vector<detail::SweepRow> rows;
  bool monotone = true;       // beta-hat nondecreasing below saturation, 10% slack
  bool rate_bound_met = true; // beta-hat >= 0.9 rate_58 on every row
  bool all_ok = true;
};

/// One run of base.sweep_kind per value of l, each into out/row_<i>.
/// Failed rows are recorded and the sweep continues. Writes out/sweep.csv.
inline SweepTable sweep_parameter(const ExperimentConfig& base, const std::vector<double>& values,
                                  const std::filesystem::path& out) {
  if (values.empty()) throw ConfigError("sweep_parameter: no l values");
  std::filesystem::create_directories(out);
  SweepTable table;
  for (std::size_t i = 0; i < values.size(); ++i) {
    detail::SweepRow row;
    row.l = values[i];
    try {
      ExperimentConfig c = base;
      c.kind = base.sweep_kind;
      c.set_damping(values[i]);
      c.output_dir = out / ("row_" + std::to_string(i));
      c.validate();
      const auto p = predicted_rate_bounds(values[i], c.metric());
      row.rate_58 = p.rate_58;
      row.rate_59 = p.rate_59;
      const auto res = run_pipeline(c, c.output_dir);
      if (res.headline.contains("beta_hat") && res.headline["beta_hat"].is_number())
        row.beta_hat = res.headline["beta_hat"].get<double>();
      if (res.headline.contains("satisfied_fraction"))
        row.satisfied_fraction = res.headline["satisfied_fraction"].get<double>();
    } catch (const Error& e) {
      row.status = detail::error_kind(e) + ": " + e.what();
    }
    table.rows.push_back(row);
  }

  CsvWriter w(out / "sweep.csv");
  w.row(std::vector<std::string>{"l", "beta_hat", "rate_58", "rate_59", "satisfied_fraction", "status"});
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("nan"); };
  for (const auto& r : table.rows)
    w.row(r.l, opt(r.beta_hat), r.rate_58, r.rate_59, opt(r.satisfied_fraction), r.status);
  w.close();

  // Monotonicity is judged on rows ordered by l, below the saturation point
  // l = 2 sqrt(lambda_1) where rate_58 stops growing.
  std::vector<const detail::SweepRow*> sorted;
  for (const auto& r : table.rows) {
    table.all_ok = table.all_ok && r.status == "ok";
    if (r.status != "ok") continue;
    if (!r.beta_hat || *r.beta_hat < 0.9 * r.rate_58) table.rate_bound_met = false;
    if (r.beta_hat) sorted.push_back(&r);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->l < b->l; });
  const double saturation = 2.0 * std::sqrt(base.metric().lambda1());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i - 1]->l < saturation && *sorted[i]->beta_hat < 0.9 * *sorted[i - 1]->beta_hat)
      table.monotone = false;
  return table;
}

/// Runs the configured experiment into cfg.output_dir and writes
/// manifest.json last. On a module error the manifest is written with
/// status "failed" and the error is rethrown.
inline RunManifest run_experiment(const ExperimentConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const auto& out = cfg.output_dir;
  std::filesystem::create_directories(out);

  nlohmann::json doc;
  doc["artifact"] = "attractor_lab";
  doc["version"] = kArtifactVersion;
  doc["kind"] = to_string(cfg.kind);
  doc["system"] = to_string(cfg.system);
  doc["seed"] = cfg.ensemble.seed;
  doc["config"] = cfg.echo;

  auto finish = [&](const std::string& status) {
    doc["status"] = status;
    doc["wall_clock_seconds"] = std::chrono::duration<double>(clock::now() - start).count();
    doc["files"] = detail::inventory(out);
    write_json(out / "manifest.json", doc);
  };

  try {
    if (cfg.kind == ExperimentKind::sweep_l) {
      const auto table = sweep_parameter(cfg, cfg.l_values, out);
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : table.rows)
        rows.push_back({{"l", r.l},
                        {"beta_hat", r.beta_hat ? nlohmann::json(*r.beta_hat) : nlohmann::json()},
                        {"rate_58", r.rate_58},
                        {"rate_59", r.rate_59},
                        {"satisfied_fraction",
                         r.satisfied_fraction ? nlohmann::json(*r.satisfied_fraction) : nlohmann::json()},
                        {"status", r.status}});
      doc["headline"] = {{"rows", rows},
                         {"monotone", table.monotone},
                         {"rate_bound_met", table.rate_bound_met},
                         {"all_rows_ok", table.all_ok}};
      doc["thresholds_met"] = table.monotone && table.rate_bound_met && table.all_ok;
    } else {
      const auto res = run_pipeline(cfg, out);
      doc["headline"] = res.headline;
      doc["thresholds_met"] = res.thresholds_met;
    }
  } catch (const Error& e) {
    doc["headline"] = nlohmann::json::object();
    doc["thresholds_met"] = false;
    doc["error"] = {{"kind", detail::error_kind(e)}, {"message", e.what()}};
    finish("failed");
    throw;
  }
  finish("ok");
  return RunManifest{doc};
}

/// Re-verifies a saved attracting set against the fresh ensemble of `cfg`.
/// The absorbing radius comes from the saved run when recorded, otherwise
/// it is recomputed from the probe ensemble.
struct VerifyOutcome {
  AttractionCertificate certificate;
  double t_star = 0.0;
};

inline VerifyOutcome verify_saved_attractor(const std::filesystem::path& dir, const ExperimentConfig& cfg) {
  const auto aset = load_attracting_set(dir);
  const auto manifest = read_json(dir / "manifest.json");
  return detail::with_semigroup(cfg, [&](const auto& sg) -> VerifyOutcome {
    const auto& m = sg.metric();
    if (aset.attractor_proxy.mode_count() != m.mode_count())
      throw DimensionError("saved attracting set has " + std::to_string(aset.attractor_proxy.mode_count()) +
                           " modes, config has " + std::to_string(m.mode_count()));
    double radius = 0.0;
    if (manifest.contains("config") && manifest["config"].contains("absorbing_radius"))
      radius = manifest["config"]["absorbing_radius"].get<double>();
    else
      radius = absorbing_radius(sg, sample_ensemble(cfg.ensemble, m), cfg.burn_in, cfg.window, cfg.sample_every)
                   .radius;
    const Ensemble fresh = sample_ensemble(detail::fresh_spec(cfg), m, "fresh");
    const auto enter = entering_times(sg, fresh, radius, cfg.burn_in + cfg.window, cfg.sample_every);
    const double t_star = *std::max_element(enter.begin(), enter.end());
    if (!std::isfinite(t_star)) throw NumericalError("fresh ensemble never entered the absorbing radius");
    ExperimentConfig c = cfg;
    c.m_min = aset.m_min;
    c.orbit_horizon = aset.orbit_horizon;
    const auto grid = detail::covered_grid(c, t_star);
    return {verify_attraction(sg, aset, fresh, t_star, grid), t_star};
  });
}

}  // namespace attractor_lab
