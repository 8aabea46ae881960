#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string command = std::string(DOFW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path path = fs::temp_directory_path() / ("dofw_cli_test_" + name + ".json");
  std::ofstream(path) << body;
  return path;
}

const char* kSmall = R"({
  "seed": 3,
  "network": {"topology": "random_gossip", "n": 4, "Q": 6},
  "loss": {"kind": "ridge", "d": 3},
  "set": {"kind": "simplex"},
  "algorithm": "dofw",
  "step": {"kind": "power", "c": 0.25, "theta": 0.4},
  "horizons": [30]
})";

}  // namespace

TEST(Cli, CheckOnlyAcceptsPreset) { EXPECT_EQ(run_cli("run --preset fig1 --check-only"), 0); }

TEST(Cli, RunsSmallConfig) {
  const fs::path out = fs::temp_directory_path() / "dofw_cli_test_out";
  fs::remove_all(out);
  const auto config = write_config("small", kSmall);
  EXPECT_EQ(run_cli("run --config " + config.string() + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "summary.json"));
  EXPECT_TRUE(fs::exists(out / "timing.csv"));
  fs::remove_all(out);
}

TEST(Cli, ConfigErrorsExitOne) {
  EXPECT_EQ(run_cli("run"), 1);
  EXPECT_EQ(run_cli("run --preset fig9"), 1);
  const auto broken = write_config("broken", "{ not json");
  EXPECT_EQ(run_cli("run --config " + broken.string()), 1);
  const auto short_period = write_config(
      "short_period", R"({"seed": 1, "network": {"topology": "cycle_split", "n": 6, "Q": 2},
        "loss": {"kind": "ridge", "d": 2}, "set": {"kind": "simplex"},
        "algorithm": "dofw", "step": {"kind": "constant", "alpha": 0.1}, "horizons": [10]})");
  EXPECT_EQ(run_cli("run --config " + short_period.string() + " --check-only"), 1);
}

TEST(Cli, PresetOverlay) {
  // Overlay shrinks fig1 to something quick; the merged document must validate.
  const auto overlay = write_config("overlay", R"({"horizons": [20], "network": {"n": 4, "Q": 4}})");
  EXPECT_EQ(run_cli("run --preset fig1 --config " + overlay.string() + " --check-only"), 0);
}

TEST(Cli, FailedCertificationExitsTwo) {
  // An unreachable comparator tolerance cannot be certified.
  std::string body = kSmall;
  body.insert(body.rfind('}'), R"(, "comparator_tolerance": 1e-300)");
  const auto config = write_config("tight", body);
  EXPECT_EQ(run_cli("run --config " + config.string()), 2);
}
