// dofw run --config <path> [--preset fig1|fig2|fig3] [--out <dir>] [--seed <u64>] [--check-only]

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dofw/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kCheckFailed = 2;

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

// Installed presets live next to the binary under share/dofw/presets; the
// source tree copy is the fallback for uninstalled builds.
fs::path find_preset(const std::string& name, const char* argv0) {
  std::vector<fs::path> dirs;
  std::error_code ec;
  const fs::path exe = fs::canonical(fs::path(argv0), ec);
  if (!ec) dirs.push_back(exe.parent_path().parent_path() / "share" / "dofw" / "presets");
  dirs.emplace_back(DOFW_SOURCE_PRESET_DIR);
  for (const auto& dir : dirs) {
    const fs::path candidate = dir / (name + ".json");
    if (fs::exists(candidate)) return candidate;
  }
  throw LoadError("preset '" + name + "' not found");
}

void print_issues(const std::vector<dofw::ConfigIssue>& issues) {
  for (const auto& issue : issues) {
    std::cerr << "config error: " << (issue.path.empty() ? "<root>" : issue.path) << ": "
              << issue.message << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed online Frank-Wolfe experiment runner"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run the experiment described by a config");

  std::string config_path, preset, out_dir;
  std::optional<std::uint64_t> seed;
  bool check_only = false;
  auto* config_opt = run->add_option("--config", config_path, "JSON config (overrides the preset)")
                         ->check(CLI::ExistingFile);
  auto* preset_opt =
      run->add_option("--preset", preset, "Shipped preset")->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Master seed (overrides seed)");
  run->add_flag("--check-only", check_only, "Validate and certify the schedule, then exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  if (!*config_opt && !*preset_opt) {
    std::cerr << "config error: give --config, --preset or both\n";
    return kConfigError;
  }

  json doc;
  try {
    if (*preset_opt) doc = load_json(find_preset(preset, argv[0]));
    if (*config_opt) {
      json overlay = load_json(config_path);
      if (doc.is_null()) {
        doc = std::move(overlay);
      } else {
        doc.merge_patch(overlay);
      }
    }
  } catch (const LoadError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (seed && doc.is_object()) doc["seed"] = *seed;
  if (!out_dir.empty() && doc.is_object()) doc["output_dir"] = out_dir;

  const auto report = dofw::validate(doc);
  if (!report.ok()) {
    print_issues(report.issues);
    return kConfigError;
  }
  if (check_only) {
    std::cout << "config ok\n";
    return kOk;
  }

  const auto config = dofw::parse_config(doc);
  try {
    const auto result = dofw::run_experiment(config);
    for (const auto& cell : result.cells) {
      std::cout << cell.stem << "  alpha=" << cell.alpha
                << "  regret/T=" << cell.regret.average.back()
                << "  mean_round_ns=" << cell.mean_round_ns << (cell.ok() ? "  ok" : "  FAILED")
                << '\n';
      for (const auto& check : cell.checks) {
        if (!check.ok) {
          std::cerr << cell.stem << ": check " << check.name << " failed: " << check.value
                    << " > " << check.tolerance << '\n';
        }
      }
      for (const auto& lemma : cell.lemmas) {
        if (!lemma.ok) {
          std::cerr << cell.stem << ": " << lemma.name << " violated at T'=" << lemma.worst_prefix
                    << ": " << lemma.lhs << " > " << lemma.rhs << '\n';
        }
      }
    }
    if (!config.output_dir.empty()) {
      std::cout << "wrote " << config.output_dir.string() << "/summary.json\n";
    }
    return result.ok() ? kOk : kCheckFailed;
  } catch (const dofw::ConfigError& e) {
    print_issues(e.issues());
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "run aborted: " << e.what() << '\n';
    return kCheckFailed;
  }
}
