// Command-line front end:
//   attractor_lab run <config>
//   attractor_lab sweep <config> --values 0.5,1,2,4
//   attractor_lab fit <trace.csv> --floor 1e-10
//   attractor_lab verify <attractor-dir> <config>
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure or
// blow-up, 3 thresholds unmet (only with --strict).

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "attractor_lab/attractor_lab.hpp"

namespace al = attractor_lab;

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kThresholds = 3 };

int thresholds_exit(bool met, bool strict) {
  if (met) return kOk;
  std::cerr << "acceptance thresholds not met\n";
  return strict ? kThresholds : kOk;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : al::split(text, ',')) out.push_back(al::parse_double(item, "--values entry"));
  if (out.empty()) throw al::ConfigError("--values is empty");
  return out;
}

al::ExperimentConfig load(const std::string& path, const std::string& output) {
  auto cfg = al::load_experiment_config(path);
  if (!output.empty()) {
    cfg.output_dir = output;
    cfg.echo["output_dir"] = output;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for attracting sets and attraction rates of damped wave equations"};
  app.require_subcommand(1);
  bool strict = false;
  app.add_flag("--strict", strict, "exit with code 3 when acceptance thresholds are not met");

  std::string config, output, values, trace_path, attractor_dir;
  double floor = 1e-10;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config, "config file")->required();
  run->add_option("-o,--output", output, "override output_dir");

  auto* sweep = app.add_subcommand("sweep", "run one experiment per damping value l");
  sweep->add_option("config", config, "config file")->required();
  sweep->add_option("--values", values, "comma-separated l values")->required();
  sweep->add_option("-o,--output", output, "override output_dir");

  auto* fit = app.add_subcommand("fit", "fit an exponential rate to a decay trace CSV");
  fit->add_option("trace", trace_path, "trace CSV (t,value,...)")->required();
  fit->add_option("--floor", floor, "ignore samples at or below this value");

  auto* verify = app.add_subcommand("verify", "re-verify a saved attracting set");
  verify->add_option("attractor_dir", attractor_dir, "directory written by a wave_attractor run")->required();
  verify->add_option("config", config, "config file supplying system and fresh ensemble")->required();
  verify->add_option("-o,--output", output, "certificate CSV path (default <dir>/verify_certificate.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto manifest = al::run_experiment(load(config, output));
      std::cout << manifest.document.dump(2) << "\n";
      return thresholds_exit(manifest.thresholds_met(), strict);
    }
    if (*sweep) {
      auto cfg = load(config, output);
      if (cfg.kind != al::ExperimentKind::sweep_l) {
        cfg.sweep_kind = cfg.kind;
        cfg.kind = al::ExperimentKind::sweep_l;
      }
      cfg.l_values = parse_values(values);
      cfg.validate();
      const auto manifest = al::run_experiment(cfg);
      std::cout << manifest.headline().dump(2) << "\n";
      return thresholds_exit(manifest.thresholds_met(), strict);
    }
    if (*fit) {
      const auto trace = al::read_decay_trace(trace_path);
      const auto f = al::fit_exponential_rate(trace, floor);
      nlohmann::json j = {{"beta_hat", f.rate},       {"amplitude", f.amplitude}, {"r_squared", f.r_squared},
                          {"t_lo", f.t_lo},           {"t_hi", f.t_hi},           {"samples_used", f.samples_used},
                          {"envelope_law", al::law_to_json(al::upper_envelope_law(trace, f))}};
      std::cout << j.dump(2) << "\n";
      return kOk;
    }
    if (*verify) {
      const auto cfg = load(config, "");
      const auto res = al::verify_saved_attractor(attractor_dir, cfg);
      const std::filesystem::path cert_path =
          output.empty() ? std::filesystem::path(attractor_dir) / "verify_certificate.csv" : std::filesystem::path(output);
      al::write_certificate(cert_path, res.certificate);
      nlohmann::json j = {{"t_star", res.t_star},
                          {"satisfied_fraction", res.certificate.satisfied_fraction},
                          {"certificate", cert_path.string()}};
      std::cout << j.dump(2) << "\n";
      return thresholds_exit(res.certificate.satisfied_fraction >= cfg.min_satisfied_fraction, strict);
    }
  } catch (const al::BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return kNumerical;
  } catch (const al::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const al::Error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
