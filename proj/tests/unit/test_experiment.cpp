#include <gtest/gtest.h>

#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hubbard_vqe/experiment.hpp"

using namespace hvqe;
namespace fs = std::filesystem;

namespace {

/// Fresh directory removed at scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("hvqe_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str(const std::string& sub = "") const { return (sub.empty() ? path_ : path_ / sub).string(); }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Small exact-backend sweep that runs in well under a second.
ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.label = "tiny";
  c.t_prime_grid = {0.3, 0.8};
  c.sectors = {Irrep::A1, Irrep::B1};
  c.vqe.n_cz = 2;
  c.vqe.n_c = 2;
  c.vqe.n_init = 1;
  c.vqe.shots = 0;
  c.vqe.optimizer = OptimizerKind::simplex;
  c.vqe.simplex.max_evaluations = 400;
  c.noise = NoiseModel::none();
  return c;
}

/// Shot-based variant so the sampled and post-selected fields are filled.
ExperimentConfig tiny_noisy_config() {
  ExperimentConfig c = tiny_config();
  c.t_prime_grid = {0.3};
  c.sectors = {Irrep::B1};
  c.vqe.n_c = 1;
  c.vqe.shots = 256;
  c.vqe.repeats = 2;
  c.vqe.optimizer = OptimizerKind::spsa;
  c.vqe.spsa.max_iters = 20;
  c.noise = NoiseModel();
  c.c4_shots = 2048;
  return c;
}

std::string config_path_error(const std::string& text) {
  try {
    ExperimentConfig::from_json(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / 2;
}

}  // namespace

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = tiny_noisy_config();
  c.coupling = "custom";
  c.custom_pairs = {{0, 1}, {1, 2}, {2, 3}};
  c.vqe.spsa.c = 0.2;
  const std::string text = c.to_json();
  EXPECT_EQ(ExperimentConfig::from_json(text).to_json(), text);
}

TEST(Config, MissingFieldsKeepDefaults) {
  const auto c = ExperimentConfig::from_json(R"({"schema_version": 1})");
  EXPECT_EQ(c.vqe.n_cz, 3u);
  EXPECT_EQ(c.vqe.n_c, 4u);
  EXPECT_EQ(c.vqe.n_init, 5u);
  EXPECT_EQ(c.vqe.shots, 1024u);
  EXPECT_DOUBLE_EQ(c.vqe.penalty, 0.05);
  EXPECT_EQ(c.vqe.repeats, 5u);
  EXPECT_EQ(c.t_prime_grid, default_grid());
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(config_path_error(R"({"schema_version": 1, "vqe": {"n_cz": -1}})"), "vqe.n_cz");
  EXPECT_EQ(config_path_error(R"({"schema_version": 1, "vqe": {"n_init": 0}})"), "vqe.n_init");
  EXPECT_EQ(config_path_error(R"({"schema_version": 1, "vqe": {"penalty": -0.1}})"), "vqe.penalty");
  EXPECT_EQ(config_path_error(R"({"schema_version": 1, "vqe": {"bogus": 1}})"), "vqe.bogus");
  EXPECT_EQ(config_path_error(R"({"schema_version": 1, "sectors": ["A1", "Q"]})"), "sectors[1]");
  EXPECT_EQ(config_path_error(R"({"schema_version": 1, "noise": {"p1": 1.5}})"), "noise.p1");
  EXPECT_EQ(config_path_error(R"({"label": "x"})"), "schema_version");
  EXPECT_EQ(config_path_error(R"({"schema_version": 2})"), "schema_version");
  EXPECT_EQ(config_path_error(R"({"schema_version": 1, "device": {"coupling": "ring"}})"), "device.coupling");
  EXPECT_EQ(config_path_error("{not json"), "");
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/config.json"), ConfigError);
}

TEST(Config, OutputDirectoryResolution) {
  ExperimentConfig c;
  ::setenv("HUBBARD_VQE_OUTPUT", "/tmp/from_env", 1);
  EXPECT_EQ(resolve_output_dir(c), "/tmp/from_env");
  EXPECT_EQ(resolve_output_dir(c, "flagged"), "flagged");
  c.output_dir = "configured";
  EXPECT_EQ(resolve_output_dir(c), "configured");
  ::unsetenv("HUBBARD_VQE_OUTPUT");
  c.output_dir.clear();
  EXPECT_EQ(resolve_output_dir(c), "results");
}

TEST(Records, IdFormatAndSeeds) {
  EXPECT_EQ(record_id(1, Irrep::A1, 0), "g1-A1-c0");
  const auto c = tiny_config();
  EXPECT_NE(cell_vqe_seed(c, 0, Irrep::A1), cell_vqe_seed(c, 0, Irrep::B1));
  EXPECT_NE(cell_vqe_seed(c, 0, Irrep::A1), cell_measure_seed(c, 0, Irrep::A1));
  EXPECT_EQ(cell_vqe_seed(c, 1, Irrep::B1), cell_vqe_seed(tiny_config(), 1, Irrep::B1));
}

TEST(Records, JsonRoundTripOfNoisyCell) {
  const auto recs = run_cell(tiny_noisy_config(), 0, Irrep::B1);
  ASSERT_EQ(recs.size(), 1u);
  const auto& r = recs[0];
  EXPECT_TRUE(r.selected);
  EXPECT_EQ(r.c4_exact.size(), 4u);
  EXPECT_EQ(r.c4_raw.size(), 4u);
  EXPECT_GT(r.retained_fraction, 0.0);
  EXPECT_LT(r.retained_fraction, 1.0);
  const std::string line = r.to_json();
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(ExperimentRecord::from_json(line).to_json(), line);
}

TEST(Records, PostselectionMovesRotationStatisticsTowardExact) {
  auto cfg = tiny_noisy_config();
  cfg.c4_shots = 16384;
  const auto r = run_cell(cfg, 0, Irrep::B1).at(0);
  ASSERT_EQ(r.c4_postselected.size(), 4u);
  EXPECT_LT(total_variation(r.c4_postselected, r.c4_exact), total_variation(r.c4_raw, r.c4_exact));
}

TEST(Records, ExactCellFields) {
  const auto recs = run_cell(tiny_config(), 1, Irrep::A1);
  ASSERT_EQ(recs.size(), 2u);
  int selected = 0;
  for (const auto& r : recs) {
    selected += r.selected;
    EXPECT_EQ(r.version, library_version());
    EXPECT_EQ(r.sector, Irrep::A1);
    EXPECT_DOUBLE_EQ(r.t_prime, 0.8);
    EXPECT_GE(r.e_non, r.e0_sector - 1e-9);
    EXPECT_NEAR(r.e_opt.value, r.e_non, 1e-9);  // exact backend
    EXPECT_EQ(r.e_opt.sigma, 0.0);
    EXPECT_TRUE(r.c4_raw.empty());
    EXPECT_GE(r.overlap, 0.0);
    EXPECT_LE(r.overlap, 1.0 + 1e-12);
  }
  EXPECT_EQ(selected, 1);
  EXPECT_THROW(run_cell(tiny_config(), 5, Irrep::A1), DomainError);
}

TEST(Summary, TiesAreReported) {
  ExperimentRecord a, b;
  a.grid_index = b.grid_index = 0;
  a.t_prime = b.t_prime = 0.5;
  a.sector = Irrep::A1;
  b.sector = Irrep::B1;
  a.e_lanczos.value = b.e_lanczos.value = -3.6;
  a.e0_sector = -3.65;
  b.e0_sector = -3.64;
  const auto rows = summarize({a, b});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].predicted, (std::vector<Irrep>{Irrep::A1, Irrep::B1}));
  EXPECT_EQ(rows[0].exact, (std::vector<Irrep>{Irrep::A1}));
  std::ostringstream csv;
  write_summary_csv(csv, rows);
  EXPECT_NE(csv.str().find("A1|B1,A1,yes,no"), std::string::npos) << csv.str();
}

TEST(Sweep, WritesFilesAndIsByteIdenticalOnRerun) {
  TempDir dir("rerun");
  auto c = tiny_config();
  c.output_dir = dir.str("a");
  const auto first = run_experiment(c);
  EXPECT_FALSE(first.interrupted);
  EXPECT_EQ(first.records.size(), 2u * 2u * 2u);
  for (const char* f : {"config.json", "records.jsonl", "summary.csv"})
    EXPECT_TRUE(fs::exists(dir.path() / "a" / f)) << f;
  c.output_dir = dir.str("b");
  run_experiment(c);
  EXPECT_EQ(slurp(dir.path() / "a" / "records.jsonl"), slurp(dir.path() / "b" / "records.jsonl"));
  EXPECT_EQ(slurp(dir.path() / "a" / "summary.csv"), slurp(dir.path() / "b" / "summary.csv"));
  EXPECT_EQ(slurp(dir.path() / "a" / "config.json"), slurp(dir.path() / "b" / "config.json"));
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  TempDir dir("threads");
  auto c = tiny_config();
  c.output_dir = dir.str("one");
  run_experiment(c);
  c.threads = 2;
  c.output_dir = dir.str("two");
  run_experiment(c);
  EXPECT_EQ(slurp(dir.path() / "one" / "records.jsonl"), slurp(dir.path() / "two" / "records.jsonl"));
}

TEST(Sweep, StopFlagKeepsFinishedCells) {
  TempDir dir("stop");
  auto c = tiny_config();
  c.output_dir = dir.str();
  std::atomic<bool> stop{false};
  std::size_t calls = 0;
  const auto out = run_experiment(c, [&](std::size_t done, std::size_t total) {
    ++calls;
    EXPECT_EQ(total, 4u);
    if (done == 1) stop = true;
  }, &stop);
  EXPECT_TRUE(out.interrupted);
  EXPECT_EQ(calls, 1u);
  EXPECT_EQ(out.records.size(), 2u);
  EXPECT_EQ(load_records(dir.str()).size(), 2u);
  EXPECT_TRUE(fs::exists(dir.path() / "summary.csv"));
}

TEST(Sweep, ExactBackendFindsTheCrossing) {
  TempDir dir("crossing");
  auto c = tiny_config();
  c.t_prime_grid = {0.48, 0.52};
  c.vqe.n_cz = 15;
  c.vqe.n_c = 1;
  c.vqe.n_init = 5;
  c.vqe.simplex = SimplexOptions{};
  c.output_dir = dir.str();
  const auto rows = summarize(run_experiment(c).records);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].exact, (std::vector<Irrep>{Irrep::B1}));
  EXPECT_EQ(rows[1].exact, (std::vector<Irrep>{Irrep::A1}));
  EXPECT_EQ(rows[0].predicted, rows[0].exact);
  EXPECT_EQ(rows[1].predicted, rows[1].exact);
}

TEST(PlotData, MissingCellsBecomeNaRows) {
  TempDir dir("plot");
  auto c = tiny_config();
  c.output_dir = dir.str();
  run_experiment(c);
  // Drop the records of the last cell as if the run had been cut short.
  const auto records_path = dir.path() / "records.jsonl";
  std::istringstream all(slurp(records_path));
  std::string line, kept;
  while (std::getline(all, line))
    if (line.find("\"g1-B1-") == std::string::npos) kept += line + "\n";
  std::ofstream(records_path) << kept;

  const auto files = emit_plotdata(dir.str());
  ASSERT_EQ(files.size(), 4u);
  const std::string fig3 = slurp(files[0]);
  EXPECT_EQ(fig3.substr(0, fig3.find('\n')),
            "t_over,sector,seq,E_opt,E_L,E_non,sigma,E0_exact,sigma_opt,sequence,label");
  EXPECT_NE(fig3.find("0.8,B1,NA,NA"), std::string::npos);
  EXPECT_NE(fig3.find("0.3,B1,0,"), std::string::npos);
  const std::string fig5 = slurp(files[2]);
  EXPECT_NE(fig5.find("2,"), std::string::npos);
  EXPECT_NE(fig5.find(",3,simplex,tiny"), std::string::npos);
  EXPECT_THROW(emit_plotdata(dir.str("nothing_here")), ConfigError);
}

TEST(Replay, IdenticalPerturbedAndVersionChecks) {
  TempDir dir("replay");
  auto c = tiny_config();
  c.output_dir = dir.str();
  run_experiment(c);
  const auto same = replay(dir.str(), "g1-A1-c1");
  EXPECT_TRUE(same.identical) << same.differences.size();
  const auto moved = replay(dir.str(), "g1-A1-c1", 1);
  EXPECT_FALSE(moved.identical);
  EXPECT_NE(std::find(moved.differences.begin(), moved.differences.end(), "theta_opt"), moved.differences.end());
  EXPECT_THROW(replay(dir.str(), "g7-A1-c0"), ConfigError);

  const auto records_path = dir.path() / "records.jsonl";
  std::string text = slurp(records_path);
  const std::string tag = "\"version\":\"" + library_version() + "\"";
  for (auto pos = text.find(tag); pos != std::string::npos; pos = text.find(tag, pos))
    text.replace(pos, tag.size(), "\"version\":\"0.0.0-old\"");
  std::ofstream(records_path) << text;
  EXPECT_THROW(replay(dir.str(), "g1-A1-c1"), VersionMismatch);
}

TEST(Records, CorruptLineIsReportedWithItsNumber) {
  TempDir dir("corrupt");
  std::ofstream(dir.path() / "records.jsonl") << "\n{\"id\": 3}\n";
  try {
    load_records(dir.str());
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "records.jsonl:2");
  }
}
