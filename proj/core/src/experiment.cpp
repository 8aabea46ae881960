#include "dofw/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dofw/csv.hpp"
#include "dofw/losses.hpp"

namespace dofw {

using nlohmann::json;

namespace {

constexpr double kConservationTol = 1e-8;
constexpr double kAverageStepTol = 1e-10;
constexpr double kFeasibilityTol = 1e-10;
constexpr int kMaxEnumeratedBoxDim = 16;

std::string join(const std::vector<ConfigIssue>& issues) {
  std::string out = "invalid config:";
  for (const auto& issue : issues) out += "\n  " + issue.path + ": " + issue.message;
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Reader {
 public:
  std::vector<ConfigIssue> issues;

  void fail(std::string path, std::string message) {
    issues.push_back({std::move(path), std::move(message)});
  }

  const json* object(const json& parent, const std::string& key, const std::string& path,
                     bool required) {
    if (!parent.contains(key)) {
      if (required) fail(path, "missing block");
      return nullptr;
    }
    const json& node = parent.at(key);
    if (!node.is_object()) {
      fail(path, "expected an object");
      return nullptr;
    }
    return &node;
  }

  template <class T>
  std::optional<T> number(const json& parent, const std::string& key, const std::string& path,
                          bool required) {
    if (!parent.contains(key)) {
      if (required) fail(path, "missing field");
      return std::nullopt;
    }
    const json& node = parent.at(key);
    if constexpr (std::is_integral_v<T>) {
      if (!node.is_number_integer()) {
        fail(path, "expected an integer");
        return std::nullopt;
      }
      if constexpr (std::is_unsigned_v<T>) {
        if (node.is_number_unsigned()) return node.get<T>();
        if (node.get<std::int64_t>() < 0) {
          fail(path, "must be nonnegative");
          return std::nullopt;
        }
      }
      return node.get<T>();
    } else {
      if (!node.is_number()) {
        fail(path, "expected a number");
        return std::nullopt;
      }
      const double value = node.get<double>();
      if (!std::isfinite(value)) {
        fail(path, "must be finite");
        return std::nullopt;
      }
      return value;
    }
  }

  std::optional<std::string> text(const json& parent, const std::string& key,
                                  const std::string& path, bool required) {
    if (!parent.contains(key)) {
      if (required) fail(path, "missing field");
      return std::nullopt;
    }
    if (!parent.at(key).is_string()) {
      fail(path, "expected a string");
      return std::nullopt;
    }
    return parent.at(key).get<std::string>();
  }

  std::optional<bool> flag(const json& parent, const std::string& key, const std::string& path) {
    if (!parent.contains(key)) return std::nullopt;
    if (!parent.at(key).is_boolean()) {
      fail(path, "expected true or false");
      return std::nullopt;
    }
    return parent.at(key).get<bool>();
  }

  // An integer or a non-empty list of integers.
  std::vector<int> int_list(const json& parent, const std::string& key, const std::string& path) {
    std::vector<int> out;
    const json& node = parent.at(key);
    if (node.is_number_integer()) {
      out.push_back(node.get<int>());
    } else if (node.is_array() && !node.empty()) {
      for (std::size_t k = 0; k < node.size(); ++k) {
        if (!node[k].is_number_integer()) {
          fail(path + "[" + std::to_string(k) + "]", "expected an integer");
          return {};
        }
        out.push_back(node[k].get<int>());
      }
    } else {
      fail(path, "expected an integer or a non-empty list of integers");
    }
    return out;
  }
};

std::optional<StepSchedule> read_step(Reader& r, const json& node, const std::string& path,
                                      bool& measured) {
  measured = false;
  if (!node.is_object()) {
    r.fail(path, "expected an object");
    return std::nullopt;
  }
  const auto kind = r.text(node, "kind", path + ".kind", true);
  if (!kind) return std::nullopt;
  auto positive = [&](const std::string& key) -> std::optional<double> {
    auto v = r.number<double>(node, key, path + "." + key, true);
    if (v && *v <= 0) {
      r.fail(path + "." + key, "must be positive");
      return std::nullopt;
    }
    return v;
  };
  if (*kind == "constant") {
    auto alpha = positive("alpha");
    if (alpha && *alpha > 1) r.fail(path + ".alpha", "must lie in (0, 1]");
    if (alpha) return StepSchedule::constant(*alpha);
  } else if (*kind == "power") {
    auto c = positive("c");
    auto theta = r.number<double>(node, "theta", path + ".theta", true);
    if (c && theta) return StepSchedule::power(*c, *theta);
  } else if (*kind == "budget") {
    auto gamma = positive("gamma");
    if (!node.contains("H")) {
      r.fail(path + ".H", "missing field (a number or \"measured\")");
      return std::nullopt;
    }
    if (node.at("H").is_string()) {
      if (node.at("H").get<std::string>() != "measured") {
        r.fail(path + ".H", "expected a number or \"measured\"");
        return std::nullopt;
      }
      measured = true;
      if (gamma) return StepSchedule::budget_tuned(*gamma, 0.0);
    } else {
      auto h = r.number<double>(node, "H", path + ".H", true);
      if (h && *h < 0) r.fail(path + ".H", "must be nonnegative");
      if (gamma && h) return StepSchedule::budget_tuned(*gamma, *h);
    }
  } else if (*kind == "estimated_budget") {
    auto gamma = positive("gamma");
    auto theta = r.number<double>(node, "theta", path + ".theta", true);
    if (gamma && theta) return StepSchedule::estimated_budget(*gamma, *theta);
  } else {
    r.fail(path + ".kind", "unknown step kind '" + *kind +
                               "' (constant, power, budget, estimated_budget)");
  }
  return std::nullopt;
}

std::optional<RunSpec> read_run(Reader& r, const json& node, const std::string& path,
                                std::size_t index) {
  RunSpec spec;
  const auto algorithm = r.text(node, "algorithm", path + ".algorithm", true);
  if (algorithm) {
    try {
      spec.algorithm = parse_algorithm(*algorithm);
    } catch (const std::invalid_argument&) {
      r.fail(path + ".algorithm", "unknown algorithm '" + *algorithm + "' (dofw, dogd)");
      return std::nullopt;
    }
  }
  if (!node.contains("step")) {
    r.fail(path + ".step", "missing block");
    return std::nullopt;
  }
  auto step = read_step(r, node.at("step"), path + ".step", spec.measured_budget);
  if (!algorithm || !step) return std::nullopt;
  spec.step = *step;
  if (auto variant = r.text(node, "dogd_variant", path + ".dogd_variant", false)) {
    if (*variant == "gradient_at_mixed") {
      spec.dogd_variant = DogdVariant::gradient_at_mixed;
    } else if (*variant == "gradient_at_local") {
      spec.dogd_variant = DogdVariant::gradient_at_local;
    } else {
      r.fail(path + ".dogd_variant", "expected gradient_at_mixed or gradient_at_local");
    }
  }
  if (spec.algorithm == Algorithm::dofw && spec.step.kind == StepSchedule::Kind::constant &&
      spec.step.scale > 1) {
    r.fail(path + ".step.alpha", "DOFW needs alpha in (0, 1]");
  }
  spec.label = r.text(node, "label", path + ".label", false)
                   .value_or(std::string(to_string(spec.algorithm)) + "_" + std::to_string(index));
  if (spec.label.empty() ||
      spec.label.find_first_of("/\\ ") != std::string::npos) {
    r.fail(path + ".label", "must be non-empty without spaces or slashes");
  }
  return spec;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

FeasibleSet ExperimentConfig::make_set(int dim) const {
  if (set_kind == "l1_ball") return FeasibleSet::l1_ball(dim, radius);
  if (set_kind == "box") return FeasibleSet::box(dim, lo, hi);
  return FeasibleSet::simplex(dim);
}

ExperimentConfig parse_config(const json& doc) {
  Reader r;
  ExperimentConfig c;
  if (!doc.is_object()) throw ConfigError(std::vector<ConfigIssue>{{"", "config must be a JSON object"}});

  if (auto seed = r.number<std::uint64_t>(doc, "seed", "seed", true)) c.seed = *seed;

  if (const json* net = r.object(doc, "network", "network", true)) {
    if (auto topo = r.text(*net, "topology", "network.topology", true)) {
      try {
        c.topology = parse_topology(*topo);
      } catch (const std::invalid_argument&) {
        r.fail("network.topology", "unknown topology '" + *topo +
                                       "' (cycle_split, random_gossip, static_complete)");
      }
    }
    if (auto n = r.number<int>(*net, "n", "network.n", true)) {
      if (*n < 1) r.fail("network.n", "must be at least 1");
      c.agents = *n;
    }
    if (auto q = r.number<int>(*net, "Q", "network.Q", true)) {
      if (*q < 1) r.fail("network.Q", "must be at least 1");
      c.period = *q;
    }
    c.network_seed = r.number<std::uint64_t>(*net, "seed", "network.seed", false)
                         .value_or(derive_seed(c.seed, 1));
  }

  std::optional<int> loss_horizon;
  if (const json* loss = r.object(doc, "loss", "loss", true)) {
    if (auto kind = r.text(*loss, "kind", "loss.kind", true)) {
      if (*kind == "static") {
        c.static_loss = true;
      } else if (*kind != "ridge") {
        r.fail("loss.kind", "unknown loss '" + *kind + "' (ridge, static)");
      }
    }
    if (!loss->contains("d")) {
      r.fail("loss.d", "missing field");
    } else {
      c.dims = r.int_list(*loss, "d", "loss.d");
      for (int d : c.dims) {
        if (d < 1) r.fail("loss.d", "dimensions must be at least 1");
      }
    }
    if (auto lambda = r.number<double>(*loss, "lambda1", "loss.lambda1", false)) {
      if (*lambda < 0) r.fail("loss.lambda1", "must be nonnegative");
      c.lambda1 = *lambda;
    }
    c.loss_seed = r.number<std::uint64_t>(*loss, "seed", "loss.seed", false)
                      .value_or(derive_seed(c.seed, 2));
    c.static_features = r.flag(*loss, "static_features", "loss.static_features").value_or(false);
    loss_horizon = r.number<int>(*loss, "T", "loss.T", false);
    if (auto n = r.number<int>(*loss, "n", "loss.n", false); n && *n != c.agents) {
      r.fail("loss.n", "loss.n = " + std::to_string(*n) + " disagrees with network.n = " +
                           std::to_string(c.agents));
    }
  }

  if (const json* set = r.object(doc, "set", "set", false)) {
    c.set_kind = r.text(*set, "kind", "set.kind", true).value_or("simplex");
    if (c.set_kind == "l1_ball") {
      c.radius = r.number<double>(*set, "radius", "set.radius", false).value_or(1.0);
      if (c.radius <= 0) r.fail("set.radius", "must be positive");
    } else if (c.set_kind == "box") {
      c.lo = r.number<double>(*set, "lo", "set.lo", false).value_or(0.0);
      c.hi = r.number<double>(*set, "hi", "set.hi", false).value_or(1.0);
      if (!(c.lo < c.hi)) r.fail("set.hi", "need set.lo < set.hi");
    } else if (c.set_kind != "simplex") {
      r.fail("set.kind", "unknown set '" + c.set_kind + "' (simplex, l1_ball, box)");
    }
    if (auto d = r.number<int>(*set, "d", "set.d", false)) {
      if (c.dims.size() != 1 || c.dims.front() != *d) {
        r.fail("set.d", "set.d = " + std::to_string(*d) +
                            " disagrees with loss.d; give the dimension in loss.d only");
      }
    }
  }

  if (doc.contains("runs")) {
    const json& runs = doc.at("runs");
    if (!runs.is_array() || runs.empty()) {
      r.fail("runs", "expected a non-empty list");
    } else {
      for (std::size_t k = 0; k < runs.size(); ++k) {
        const std::string path = "runs[" + std::to_string(k) + "]";
        if (!runs[k].is_object()) {
          r.fail(path, "expected an object");
          continue;
        }
        if (auto spec = read_run(r, runs[k], path, k)) c.runs.push_back(*spec);
      }
    }
    if (doc.contains("algorithm") || doc.contains("step")) {
      r.fail("runs", "give either runs or a top-level algorithm/step, not both");
    }
  } else if (doc.contains("algorithm")) {
    if (auto spec = read_run(r, doc, "", 0)) {
      if (!doc.contains("label")) spec->label = std::string(to_string(spec->algorithm));
      c.runs.push_back(*spec);
    }
  } else {
    r.fail("runs", "missing: give runs or a top-level algorithm and step");
  }
  for (std::size_t a = 0; a < c.runs.size(); ++a) {
    for (std::size_t b = a + 1; b < c.runs.size(); ++b) {
      if (c.runs[a].label == c.runs[b].label) {
        r.fail("runs[" + std::to_string(b) + "].label", "duplicate label '" + c.runs[b].label + "'");
      }
    }
  }

  if (doc.contains("horizons")) {
    c.horizons = r.int_list(doc, "horizons", "horizons");
    if (loss_horizon && !c.horizons.empty() &&
        *loss_horizon != *std::max_element(c.horizons.begin(), c.horizons.end())) {
      r.fail("loss.T", "loss.T = " + std::to_string(*loss_horizon) +
                           " disagrees with max(horizons) = " +
                           std::to_string(*std::max_element(c.horizons.begin(), c.horizons.end())));
    }
  } else if (loss_horizon) {
    c.horizons = {*loss_horizon};
  }
  for (int t : c.horizons) {
    if (t < 1) r.fail("horizons", "horizons must be at least 1");
  }

  if (auto out = r.text(doc, "output_dir", "output_dir", false)) c.output_dir = *out;
  if (auto point = r.text(doc, "regret_point", "regret_point", false)) {
    if (*point == "mixed") {
      c.regret_point = RegretPoint::mixed;
    } else if (*point != "played") {
      r.fail("regret_point", "expected played or mixed");
    }
  }
  c.full_diagnostics = r.flag(doc, "full_diagnostics", "full_diagnostics").value_or(false);
  if (c.regret_point == RegretPoint::mixed) c.full_diagnostics = true;
  c.write_schedule = r.flag(doc, "write_schedule", "write_schedule").value_or(false);
  c.theory_checks = r.flag(doc, "theory_checks", "theory_checks").value_or(true);
  if (auto tol = r.number<double>(doc, "comparator_tolerance", "comparator_tolerance", false)) {
    if (*tol <= 0) r.fail("comparator_tolerance", "must be positive");
    c.comparator_tolerance = *tol;
  }

  const bool needs_budgets =
      c.theory_checks || std::any_of(c.runs.begin(), c.runs.end(),
                                     [](const RunSpec& s) { return s.measured_budget; });
  if (c.set_kind == "box" && needs_budgets) {
    for (int d : c.dims) {
      if (d > kMaxEnumeratedBoxDim) {
        r.fail("set.kind", "box budgets need vertex enumeration, so d <= " +
                               std::to_string(kMaxEnumeratedBoxDim) +
                               "; set theory_checks to false and avoid measured budgets");
        break;
      }
    }
  }

  if (r.issues.empty()) {
    for (std::size_t k = 0; k < c.runs.size(); ++k) {
      if (c.runs[k].measured_budget) continue;
      for (int t : c.horizons) {
        try {
          alpha_at(c.runs[k].step, t);
        } catch (const std::invalid_argument& e) {
          r.fail("runs[" + std::to_string(k) + "].step", e.what());
          break;
        }
      }
    }
  }

  if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
  return c;
}

ValidationReport validate(const json& doc) {
  ValidationReport report;
  ExperimentConfig c;
  try {
    c = parse_config(doc);
  } catch (const ConfigError& e) {
    report.issues = e.issues();
    return report;
  }
  const int min_q = min_period(c.agents, c.topology);
  if (c.period < min_q) {
    report.issues.push_back(
        {"network.Q", "Q = " + std::to_string(c.period) + " is too small: " +
                          std::string(to_string(c.topology)) + " over n = " +
                          std::to_string(c.agents) + " agents needs Q >= " +
                          std::to_string(min_q) +
                          " for every window of Q rounds to be jointly strongly connected"});
    return report;
  }
  for (int t : c.horizons) {
    try {
      const auto schedule = generate_schedule(c.agents, t, c.period, c.network_seed, c.topology);
      const auto cert = certify_schedule(schedule);
      if (!cert.ok) {
        const auto& v = cert.violations.front();
        report.issues.push_back({"network", "schedule for T = " + std::to_string(t) +
                                                " fails certification at round " +
                                                std::to_string(v.round) + ": " + v.detail});
      }
    } catch (const std::exception& e) {
      report.issues.push_back({"network", e.what()});
    }
  }
  return report;
}

bool CellResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.ok; }) &&
         std::all_of(lemmas.begin(), lemmas.end(), [](const auto& l) { return l.ok; });
}

bool ExperimentResult::ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.ok(); });
}

namespace {

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  fn(out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

CheckResult max_check(std::string name, const RunTrace& trace, double tol,
                      double RoundStats::*field) {
  CheckResult check{std::move(name), true, 0.0, tol};
  for (Round t = 1; t <= trace.horizon(); ++t) {
    check.value = std::max(check.value, trace.stats(t).*field);
  }
  check.ok = check.value <= tol;
  return check;
}

// Consensus and gradient-difference columns for either algorithm; the
// tracking column is left empty for runs without gradient tracking.
void write_diagnostics(std::ostream& out, const RunTrace& trace) {
  if (trace.algorithm() == Algorithm::dofw) {
    write_diagnostics_csv(out, consensus_diagnostics(trace));
    return;
  }
  csv::write_row(out, {"t", "consensus_err", "grad_consensus_err", "delta_sum"});
  for (Round t = 1; t <= trace.horizon(); ++t) {
    const auto& s = trace.stats(t);
    csv::write_row(out, {std::to_string(t), csv::format(s.consensus_error), "",
                         csv::format(s.delta_norm_sum)});
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult result;
  const bool write = !config.output_dir.empty();
  if (write) std::filesystem::create_directories(config.output_dir);
  const int max_horizon = *std::max_element(config.horizons.begin(), config.horizons.end());
  const bool needs_budgets =
      config.theory_checks ||
      std::any_of(config.runs.begin(), config.runs.end(),
                  [](const RunSpec& s) { return s.measured_budget; });

  std::vector<MixingSchedule> schedules;
  for (int t : config.horizons) {
    auto schedule = generate_schedule(config.agents, t, config.period, config.network_seed,
                                      config.topology);
    const auto cert = certify_schedule(schedule);
    if (!cert.ok) {
      throw ConfigError(std::vector<ConfigIssue>{{"network", "generated schedule fails certification: " +
                                         cert.violations.front().detail}});
    }
    if (write && config.write_schedule) {
      write_file(config.output_dir / ("schedule_T" + std::to_string(t) + ".csv"),
                 [&](std::ostream& out) { write_schedule_csv(out, schedule); });
    }
    schedules.push_back(std::move(schedule));
  }

  for (int d : config.dims) {
    const FeasibleSet set = config.make_set(d);
    RidgeOptions options;
    options.lambda1 = config.lambda1;
    options.static_features = config.static_features;
    RidgeStream stream = generate_ridge(config.agents, d, max_horizon, config.loss_seed, options);
    if (config.static_loss) stream = static_stream(stream, 1, max_horizon + 1);

    const auto comparators =
        comparator_series(stream, max_horizon, set, config.comparator_tolerance);
    std::optional<VariationSeries> h_series, d_series;
    std::optional<LipschitzConstants> constants;
    if (needs_budgets) {
      h_series = function_variation(stream, set, max_horizon);
      d_series = gradient_variation(stream, set, max_horizon);
      constants = lipschitz_constants(stream, set);
    }
    const auto x_init = default_initial_points(set, config.agents);

    for (std::size_t h = 0; h < config.horizons.size(); ++h) {
      const int horizon = config.horizons[h];
      const MixingSchedule& schedule = schedules[h];
      for (const RunSpec& spec : config.runs) {
        StepSchedule step = spec.step;
        if (spec.measured_budget) step.budget = h_series->prefix(horizon);
        RunOptions run_options;
        run_options.full_diagnostics = config.full_diagnostics;
        run_options.dogd_variant = spec.dogd_variant;
        RunTrace trace = run(spec.algorithm, schedule, stream, step, x_init, set, run_options);

        CellResult cell;
        cell.label = spec.label;
        cell.algorithm = spec.algorithm;
        cell.dim = d;
        cell.horizon = horizon;
        cell.alpha = trace.alpha();
        cell.stem = spec.label + "_d" + std::to_string(d) + "_T" + std::to_string(horizon);

        if (spec.algorithm == Algorithm::dofw) {
          cell.checks.push_back(max_check("gradient_tracking_conservation", trace,
                                          kConservationTol, &RoundStats::conservation_error));
          cell.checks.push_back(max_check("average_dynamics", trace, kAverageStepTol,
                                          &RoundStats::average_step_error));
        }
        cell.checks.push_back(
            max_check("feasibility", trace, kFeasibilityTol, &RoundStats::infeasibility));
        {
          double worst_gap = 0.0;
          for (int k = 0; k < horizon; ++k) {
            worst_gap = std::max(worst_gap, comparators.gap[static_cast<std::size_t>(k)]);
          }
          cell.checks.push_back({"comparator_gap", worst_gap <= config.comparator_tolerance,
                                 worst_gap, config.comparator_tolerance});
        }

        cell.regret = dynamic_regret(trace, stream, comparators, config.regret_point);
        const bool bound_applies =
            config.theory_checks && spec.algorithm == Algorithm::dofw && cell.alpha <= 1.0;
        if (h_series) {
          std::optional<BoundInputs> base;
          if (bound_applies) base = bound_inputs_for(trace, schedule, x_init, set, *constants);
          attach_budgets(cell.regret, *h_series, *d_series, base ? &*base : nullptr);
          if (base) {
            BoundInputs full = *base;
            full.horizon = horizon;
            full.function_variation = h_series->prefix(horizon);
            full.gradient_variation = d_series->prefix(horizon);
            cell.bound = regret_bound(full);

            CheckResult bound_check{"regret_bound", true, 0.0, 1.0};
            for (int k = 0; k < horizon; ++k) {
              const double rhs = cell.regret.bound_rhs[static_cast<std::size_t>(k)];
              const double worst = cell.regret.cumulative.row(k).maxCoeff();
              bound_check.value = std::max(bound_check.value, worst / rhs);
              if (worst > rhs) bound_check.ok = false;
            }
            cell.checks.push_back(bound_check);

            const ConsensusSeries series = consensus_diagnostics(trace);
            LemmaInputs inputs;
            inputs.trace = &trace;
            inputs.series = &series;
            inputs.stream = &stream;
            inputs.comparators = &comparators;
            inputs.function_variation = &*h_series;
            inputs.gradient_variation = &*d_series;
            inputs.bound = *base;
            cell.lemmas = lemma_checks(inputs);
          }
        }

        const RunTrace* ptr = &trace;
        cell.mean_round_ns = timing_report(std::span<const RunTrace* const>(&ptr, 1))
                                 .front()
                                 .mean_round_ns;
        if (write) {
          const auto dir = config.output_dir;
          write_file(dir / (cell.stem + "_trace.csv"),
                     [&](std::ostream& out) { write_trace_csv(out, trace); });
          if (config.full_diagnostics) {
            write_file(dir / (cell.stem + "_trace_full.csv"),
                       [&](std::ostream& out) { write_trace_diagnostics_csv(out, trace); });
          }
          write_file(dir / (cell.stem + "_regret.csv"),
                     [&](std::ostream& out) { write_regret_csv(out, cell.regret); });
          write_file(dir / (cell.stem + "_diagnostics.csv"),
                     [&](std::ostream& out) { write_diagnostics(out, trace); });
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }

  if (write) {
    write_file(config.output_dir / "timing.csv", [&](std::ostream& out) {
      csv::write_row(out, {"label", "algorithm", "d", "T", "mean_round_ns"});
      for (const auto& cell : result.cells) {
        csv::write_row(out, {cell.label, std::string(to_string(cell.algorithm)),
                             std::to_string(cell.dim), std::to_string(cell.horizon),
                             csv::format(cell.mean_round_ns)});
      }
    });
    write_file(config.output_dir / "summary.json", [&](std::ostream& out) {
      out << summary_json(config, result).dump(2) << '\n';
    });
  }
  return result;
}

json summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
  json cells = json::array();
  for (const auto& cell : result.cells) {
    json checks = json::array();
    for (const auto& c : cell.checks) {
      checks.push_back({{"name", c.name}, {"ok", c.ok}, {"value", c.value},
                        {"tolerance", c.tolerance}});
    }
    json lemmas = json::array();
    for (const auto& l : cell.lemmas) {
      lemmas.push_back({{"name", l.name}, {"ok", l.ok}, {"worst_prefix", l.worst_prefix},
                        {"lhs", l.lhs}, {"rhs", l.rhs}, {"worst_ratio", l.worst_ratio}});
    }
    json entry{{"label", cell.label},
               {"algorithm", to_string(cell.algorithm)},
               {"d", cell.dim},
               {"T", cell.horizon},
               {"alpha", cell.alpha},
               {"final_avg_regret_over_T", cell.regret.average.back()},
               {"checks", checks},
               {"lemma_checks", lemmas},
               {"ok", cell.ok()},
               {"files", cell.stem}};
    if (cell.bound) {
      entry["bound"] = {{"C1", cell.bound->c1},       {"C2", cell.bound->c2},
                        {"C3", cell.bound->c3},       {"C4", cell.bound->c4},
                        {"sigma", cell.bound->sigma}, {"Gamma", cell.bound->gamma_cap},
                        {"rhs_at_T", cell.bound->rhs}};
    }
    if (!cell.regret.function_variation.empty()) {
      entry["H_T"] = cell.regret.function_variation.back();
      entry["D_T"] = cell.regret.gradient_variation.back();
    }
    cells.push_back(std::move(entry));
  }
  return json{{"seed", config.seed},
              {"network_seed", config.network_seed},
              {"loss_seed", config.loss_seed},
              {"topology", to_string(config.topology)},
              {"n", config.agents},
              {"Q", config.period},
              {"set", config.set_kind},
              {"ok", result.ok()},
              {"cells", cells}};
}

}  // namespace dofw
