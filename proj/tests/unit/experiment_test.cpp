#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dofw/experiment.hpp"

using namespace dofw;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config() {
  return json::parse(R"({
    "seed": 7,
    "network": {"topology": "cycle_split", "n": 4, "Q": 4},
    "loss": {"kind": "ridge", "d": 3, "lambda1": 1e-3},
    "set": {"kind": "simplex"},
    "runs": [
      {"label": "fw", "algorithm": "dofw", "step": {"kind": "power", "c": 0.25, "theta": 0.4}},
      {"label": "gd", "algorithm": "dogd", "step": {"kind": "constant", "alpha": 0.1}}
    ],
    "horizons": [40, 80]
  })");
}

bool mentions(const ValidationReport& report, const std::string& path, const std::string& text) {
  for (const auto& issue : report.issues) {
    if (issue.path == path && issue.message.find(text) != std::string::npos) return true;
  }
  return false;
}

// File contents with wall-clock columns (header ending in _ns) removed.
std::string without_timing(const fs::path& path) {
  std::ifstream in(path);
  std::string line, out;
  std::vector<bool> keep;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (keep.empty()) {
      for (const auto& f : fields) keep.push_back(!f.ends_with("_ns"));
    }
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k >= keep.size() || keep[k]) out += fields[k] + ",";
    }
    out += "\n";
  }
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dofw_experiment_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, SmallConfigIsValid) {
  const auto report = validate(small_config());
  EXPECT_TRUE(report.ok());
  const auto c = parse_config(small_config());
  EXPECT_EQ(c.agents, 4);
  EXPECT_EQ(c.runs.size(), 2u);
  EXPECT_EQ(c.horizons, (std::vector<int>{40, 80}));
}

TEST(Config, MissingSeed) {
  auto doc = small_config();
  doc.erase("seed");
  EXPECT_TRUE(mentions(validate(doc), "seed", "missing"));
}

TEST(Config, AgentCountMismatchNamesBothFields) {
  auto doc = small_config();
  doc["loss"]["n"] = 5;
  const auto report = validate(doc);
  ASSERT_FALSE(report.ok());
  EXPECT_TRUE(mentions(report, "loss.n", "network.n"));
}

TEST(Config, PeriodBelowConnectivityWindow) {
  auto doc = small_config();
  doc["network"]["Q"] = 2;
  const auto report = validate(doc);
  ASSERT_FALSE(report.ok());
  EXPECT_TRUE(mentions(report, "network.Q", "needs Q >= 3"));
}

TEST(Config, EveryIssueReported) {
  auto doc = small_config();
  doc["set"]["kind"] = "sphere";
  doc["runs"][0]["algorithm"] = "admm";
  doc["horizons"] = json::array({0});
  const auto report = validate(doc);
  EXPECT_TRUE(mentions(report, "set.kind", "sphere"));
  EXPECT_TRUE(mentions(report, "runs[0].algorithm", "admm"));
  EXPECT_TRUE(mentions(report, "horizons", "at least 1"));
  EXPECT_THROW(parse_config(doc), ConfigError);
}

TEST(Config, FrankWolfeStepAboveOne) {
  auto doc = small_config();
  doc["runs"][0]["step"] = {{"kind", "constant"}, {"alpha", 1.5}};
  EXPECT_FALSE(validate(doc).ok());
}

TEST(Config, LossHorizonMustMatch) {
  auto doc = small_config();
  doc["loss"]["T"] = 50;
  EXPECT_TRUE(mentions(validate(doc), "loss.T", "80"));
}

TEST(Config, ShippedPresetsValidate) {
  for (const char* name : {"fig1", "fig2", "fig3"}) {
    std::ifstream in(fs::path(DOFW_PRESET_DIR) / (std::string(name) + ".json"));
    ASSERT_TRUE(in) << name;
    const auto report = validate(json::parse(in));
    EXPECT_TRUE(report.ok()) << name;
  }
}

TEST(Experiment, RunsAndPassesChecks) {
  const auto result = run_experiment(parse_config(small_config()));
  ASSERT_EQ(result.cells.size(), 4u);  // 2 runs x 2 horizons
  EXPECT_TRUE(result.ok());
  for (const auto& cell : result.cells) {
    EXPECT_EQ(cell.regret.average.size(), static_cast<std::size_t>(cell.horizon));
    if (cell.algorithm == Algorithm::dofw) {
      EXPECT_TRUE(cell.bound.has_value());
      EXPECT_FALSE(cell.lemmas.empty());
    }
  }
}

TEST(Experiment, OutputsAreReproducible) {
  auto doc = small_config();
  doc["write_schedule"] = true;
  const fs::path a = scratch("a"), b = scratch("b");
  doc["output_dir"] = a.string();
  run_experiment(parse_config(doc));
  doc["output_dir"] = b.string();
  run_experiment(parse_config(doc));

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    ASSERT_TRUE(fs::exists(b / name)) << name;
    EXPECT_EQ(without_timing(entry.path()), without_timing(b / name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 14);  // 4 cells x 3 CSVs, schedules, timing, summary
  EXPECT_TRUE(fs::exists(a / "summary.json"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, SeedChangesTheData) {
  auto doc = small_config();
  doc["horizons"] = json::array({40});
  const auto first = run_experiment(parse_config(doc));
  doc["seed"] = 8;
  const auto second = run_experiment(parse_config(doc));
  EXPECT_NE(first.cells[0].regret.average.back(), second.cells[0].regret.average.back());
}
