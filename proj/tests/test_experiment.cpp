#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "attractor_lab/experiment.hpp"

using namespace attractor_lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("attractor_lab_exp_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig config(const std::string& text, const fs::path& out) {
  auto c = read_experiment_config(KeyValues::parse(text));
  c.output_dir = out;
  return c;
}

const char* kOracle =
    "kind = oracle_decay\nl = 1\nmode_count = 16\npoints = 10\nseed = 4\nt_grid = 0:0.5:30\n";

// Small nonlinear system that runs in well under a second.
const char* kWave =
    "kind = wave_attractor\nsystem = wave\nmode_count = 6\ndt = 0.02\nk = 0\nl = 2\n"
    "f_coeffs = 0, -1, 0, 1\nh_coeffs = 2\nkernel_weights = 0.1\nkernel_vectors = 1, 0.25\n"
    "points = 8\nradius = 1\nseed = 2\nfresh_points = 6\nburn_in = 4\nwindow = 4\n"
    "t_grid = 0:0.5:12\norbit_horizon = 12\nm_range = 1, 3\n";

std::map<std::string, std::string> checksums(const RunManifest& m) {
  std::map<std::string, std::string> out;
  for (const auto& f : m.document.at("files")) out[f.at("path")] = f.at("sha256");
  return out;
}

}  // namespace

TEST(RunExperiment, OracleDecayRecoversEnvelopeRate) {
  const auto out = scratch("oracle");
  const auto m = run_experiment(config(kOracle, out));
  ASSERT_TRUE(m.ok());
  const double beta = m.headline().at("beta_hat").get<double>();
  EXPECT_NEAR(beta, 0.5, 0.025);
  EXPECT_DOUBLE_EQ(m.headline().at("rate_58").get<double>(), 0.25);
  EXPECT_TRUE(m.thresholds_met());
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  EXPECT_TRUE(fs::exists(out / "semidist_trace.csv"));
}

TEST(RunExperiment, ZeroEnsembleAtEquilibriumGivesZeroDistances) {
  const auto out = scratch("zero");
  const auto m = run_experiment(config(
      "kind = wave_attractor\nmode_count = 4\ndt = 0.05\nl = 1\nf_coeffs = 0, 0, 0, 1\n"
      "points = 5\nradius = 0\nfresh_points = 3\nburn_in = 1\nwindow = 1\nt_grid = 0:1:8\n"
      "orbit_horizon = 8\nm_range = 1, 2\n",
      out));
  ASSERT_TRUE(m.ok());
  EXPECT_TRUE(m.headline().at("beta_hat").is_null());
  const auto cert = read_csv(out / "certificate.csv");
  ASSERT_FALSE(cert.rows.empty());
  for (const auto& r : cert.rows) EXPECT_EQ(parse_double(r[cert.column("measured")]), 0.0);
  const auto alpha = read_decay_trace(out / "alpha_trace.csv");
  for (double v : alpha.values) EXPECT_EQ(v, 0.0);
  EXPECT_DOUBLE_EQ(m.headline().at("satisfied_fraction").get<double>(), 1.0);
}

TEST(RunExperiment, RerunGivesIdenticalChecksums) {
  const auto a = run_experiment(config(kWave, scratch("det_a")));
  const auto b = run_experiment(config(kWave, scratch("det_b")));
  ASSERT_TRUE(a.ok());
  const auto ca = checksums(a), cb = checksums(b);
  EXPECT_GE(ca.size(), 8u);
  // The attracting-set manifest echoes output_dir, which differs between the two runs.
  for (const auto& [path, sum] : ca)
    if (path != "attractor/manifest.json") {
      EXPECT_EQ(cb.at(path), sum) << path;
    }
}

TEST(RunExperiment, ManifestListsEveryFile) {
  const auto out = scratch("inventory");
  const auto m = run_experiment(config(kWave, out));
  std::set<std::string> listed;
  for (const auto& f : m.document.at("files")) listed.insert(f.at("path").get<std::string>());
  for (const auto& rel : list_files(out))
    if (rel != "manifest.json") {
      EXPECT_TRUE(listed.count(rel.generic_string())) << rel;
    }
  EXPECT_EQ(m.document.at("version"), kArtifactVersion);
  EXPECT_EQ(m.document.at("seed"), 2);
  EXPECT_TRUE(m.document.at("wall_clock_seconds").is_number());
  EXPECT_GE(m.headline().at("satisfied_fraction").get<double>(), 0.95);
}

TEST(RunExperiment, FailureWritesFailedManifestAndKeepsPartialFiles) {
  const auto out = scratch("failed");
  // orbit_horizon < m_max is rejected by the builder, after absorbed.csv is written.
  const auto cfg = config(std::string(kWave) + "orbit_sample_every = 0.5\n", out);
  auto bad = cfg;
  bad.orbit_horizon = 2.0;
  EXPECT_THROW(run_experiment(bad), ConfigError);
  const auto doc = read_json(out / "manifest.json");
  EXPECT_EQ(doc.at("status"), "failed");
  EXPECT_EQ(doc.at("error").at("kind"), "config");
  EXPECT_TRUE(fs::exists(out / "absorbed.csv"));
  bool listed = false;
  for (const auto& f : doc.at("files")) listed = listed || f.at("path") == "absorbed.csv";
  EXPECT_TRUE(listed);
}

TEST(RunExperiment, QuasistabilityAndCriteriaSuite) {
  const auto q = run_experiment(config(
      "kind = quasistability\nsystem = linear\nl = 1\nmode_count = 8\npoints = 30\nperiod = 3\nn_periods = 4\n",
      scratch("qs")));
  EXPECT_TRUE(q.thresholds_met());
  EXPECT_DOUBLE_EQ(q.headline().at("eta_predicted").get<double>(), 0.5);
  EXPECT_GT(q.headline().at("pair_count").get<int>(), 0);

  std::string suite = kWave;
  suite.replace(suite.find("wave_attractor"), 14, "criteria_suite");
  const auto suite_dir = scratch("suite");
  const auto c = run_experiment(config(suite + "tail_modes = 2\n", suite_dir));
  EXPECT_TRUE(c.ok());
  EXPECT_DOUBLE_EQ(c.headline().at("hausdorff_alpha_within_fraction").get<double>(), 1.0);
  EXPECT_TRUE(fs::exists(suite_dir / "contractive.csv"));
}

TEST(Sweep, RateColumnMatchesFormula) {
  const auto cfg = config(kOracle, "");
  const auto out = scratch("sweep_rates");
  const auto t = sweep_parameter(cfg, {0.5, 1, 2, 4}, out);
  ASSERT_EQ(t.rows.size(), 4u);
  const double expected[] = {0.125, 0.25, 0.5, 0.5};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(t.rows[i].rate_58, expected[i]);
    EXPECT_EQ(t.rows[i].status, "ok");
  }
  const auto csv = read_csv(out / "sweep.csv");
  EXPECT_EQ(csv.header, (std::vector<std::string>{"l", "beta_hat", "rate_58", "rate_59", "satisfied_fraction",
                                                  "status"}));
  EXPECT_EQ(csv.rows.size(), 4u);
}

TEST(Sweep, SingleValueAndDuplicates) {
  const auto cfg = config(kOracle, "");
  EXPECT_EQ(sweep_parameter(cfg, {1.0}, scratch("sweep_one")).rows.size(), 1u);
  const auto out = scratch("sweep_dup");
  const auto t = sweep_parameter(cfg, {1.0, 1.0}, out);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(*t.rows[0].beta_hat, *t.rows[1].beta_hat);
  const auto csv = read_csv(out / "sweep.csv");
  EXPECT_EQ(csv.rows[0], csv.rows[1]);
  EXPECT_EQ(sha256_file(out / "row_0" / "semidist_trace.csv"), sha256_file(out / "row_1" / "semidist_trace.csv"));
}

TEST(Sweep, FailedRowIsRecordedAndSweepContinues) {
  const auto t = sweep_parameter(config(kOracle, ""), {-1.0, 1.0}, scratch("sweep_fail"));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_NE(t.rows[0].status, "ok");
  EXPECT_EQ(t.rows[1].status, "ok");
  EXPECT_FALSE(t.all_ok);
}

TEST(Verify, SavedAttractorReproducesCertificate) {
  const auto out = scratch("verify");
  const auto cfg = config(kWave, out);
  const auto m = run_experiment(cfg);
  const auto res = verify_saved_attractor(out / "attractor", cfg);
  EXPECT_DOUBLE_EQ(res.certificate.satisfied_fraction, m.headline().at("satisfied_fraction").get<double>());
  const auto saved = read_csv(out / "certificate.csv");
  ASSERT_EQ(saved.rows.size(), res.certificate.times.size());
  for (std::size_t i = 0; i < saved.rows.size(); ++i)
    EXPECT_EQ(parse_double(saved.rows[i][1]), res.certificate.measured[i]);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(ATTRACTOR_LAB_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  EXPECT_EQ(run("run " + write("ok.cfg", kOracle) + " -o " + (dir / "ok").string()), 0);
  EXPECT_EQ(run("fit " + (dir / "ok" / "semidist_trace.csv").string() + " --floor 1e-12"), 0);
  EXPECT_EQ(run("run " + write("bad.cfg", "kind = oracle_decay\nbogus = 1\n")), 1);
  EXPECT_EQ(run("run " + (dir / "missing.cfg").string()), 1);
  // A closeness threshold no pair can meet is a numerical failure.
  EXPECT_EQ(run("run " +
                write("tight.cfg", "kind = quasistability\nsystem = linear\npoints = 5\ncloseness = 1e-12\n") +
                " -o " + (dir / "tight").string()),
            2);
  // Overdamped l = 3 decays at (3 - sqrt 5)/2 < 0.9 rate_58 = 0.45.
  const std::string slow = write("slow.cfg", std::string(kOracle) + "l = 3\n");
  std::string text;
  {
    std::ifstream in(slow);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    text.replace(text.find("l = 1\n"), 6, "");
  }
  write("slow.cfg", text);
  EXPECT_EQ(run("run " + slow + " -o " + (dir / "slow").string()), 0);
  EXPECT_EQ(run("--strict run " + slow + " -o " + (dir / "slow2").string()), 3);
  EXPECT_EQ(run("sweep " + write("sw.cfg", kOracle) + " --values 1,2 -o " + (dir / "sw").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "sw" / "sweep.csv"));
}
