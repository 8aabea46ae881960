// Acceptance suite. One PASS/FAIL line per criterion; `acceptance AC3` runs a
// single criterion. Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dofw/algorithms.hpp"
#include "dofw/experiment.hpp"
#include "dofw/metrics.hpp"
#include "dofw/network.hpp"
#include "oracles.hpp"

using namespace dofw;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Tolerances
constexpr double kConservationTol = 1e-8;        // AC1, per coordinate
constexpr double kSlopeLimit = 0.75;             // AC5
constexpr double kRegretRatioLimit = 2.0;        // AC6
constexpr double kGridStep = 1e-3;               // AC7
constexpr double kGridTol = 1e-4;                // AC7, objective value
constexpr double kGradientRelTol = 1e-6;         // AC8
constexpr double kFiniteDifferenceStep = 1e-5;   // AC8

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

nlohmann::json preset(const std::string& name) {
  std::ifstream in(std::string(DOFW_PRESET_DIR) + "/" + name + ".json");
  auto doc = nlohmann::json::parse(in);
  doc.erase("output_dir");
  return doc;
}

const Topology kTopologies[] = {Topology::cycle_split, Topology::random_gossip,
                                Topology::static_complete};

VectorXd ridge_gradient(const RidgeStream& s, int i, int t, const VectorXd& x) {
  const VectorXd a = s.feature(i, t);
  return a * (a.dot(x) - s.label(i, t)) + 2.0 * s.lambda1() * x;
}

// L_X and G_X over the simplex from raw samples.
std::pair<double, double> simplex_constants(const RidgeStream& s, int rounds) {
  double lf = 0, lg = 0;
  for (int t = 1; t <= rounds; ++t) {
    for (int i = 0; i < s.agents(); ++i) {
      const VectorXd a = s.feature(i, t);
      lg = std::max(lg, a.squaredNorm() + 2 * s.lambda1());
      for (int k = 0; k < s.dim(); ++k) {
        lf = std::max(lf, ridge_gradient(s, i, t, VectorXd::Unit(s.dim(), k)).norm());
      }
    }
  }
  return {lf, lg};
}

double observed_zeta(const MixingSchedule& sched) {
  double z = 1.0;
  for (const auto& a : sched.matrices) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      if (a.data()[k] > 0) z = std::min(z, a.data()[k]);
    }
  }
  return z;
}

// AC1
Outcome conservation() {
  double worst = 0;
  int configs = 0;
  for (int n : {1, 2, 5, 20}) {
    for (Topology topo : kTopologies) {
      const int q = min_period(n, topo);
      const int horizon = 200;
      const auto sched = generate_schedule(n, horizon, q, 11 + n, topo);
      const auto stream = generate_ridge(n, 8, horizon, 5 + n);
      const auto set = FeasibleSet::simplex(8);
      const auto x0 = default_initial_points(set, n);
      RunOptions opts;
      opts.full_diagnostics = true;
      const auto trace = run(Algorithm::dofw, sched, stream, StepSchedule::power(0.25, 0.4), x0,
                             set, opts);
      for (int t = 1; t <= horizon; ++t) {
        VectorXd corrected = VectorXd::Zero(8), local = VectorXd::Zero(8);
        for (int i = 0; i < n; ++i) {
          corrected += trace.corrected(i, t);
          local += ridge_gradient(stream, i, t, trace.x_mixed(i, t));
        }
        worst = std::max(worst, (corrected - local).cwiseAbs().maxCoeff());
      }
      ++configs;
    }
  }
  return {worst <= kConservationTol,
          fmt("%d configs, max |sum corrected - sum grad| = %.3g (tol %.0e)", configs, worst,
              kConservationTol)};
}

// AC2
Outcome ergodicity() {
  long long pairs = 0, violations = 0;
  double worst = 0;
  int schedules = 0;
  for (Topology topo : kTopologies) {
    for (int n = 1; n <= 8; ++n) {
      for (int q = 1; q <= 5; ++q) {
        if (q < min_period(n, topo)) continue;
        for (std::uint64_t seed : {1u, 2u}) {
          const int horizon = 60;
          const auto sched = generate_schedule(n, horizon, q, seed, topo);
          const auto [sigma, gamma] = oracle::mixing_constants(observed_zeta(sched), n, q);
          for (int s = 1; s <= horizon; ++s) {
            MatrixXd phi = MatrixXd::Identity(n, n);
            for (int t = s; t <= std::min(horizon, s + 50); ++t) {
              phi = sched.matrices[t - 1] * phi;
              const double cap = gamma * std::pow(sigma, t - s);
              const double dev = (phi.array() - 1.0 / n).abs().maxCoeff();
              worst = std::max(worst, dev / cap);
              if (dev > cap) ++violations;
              ++pairs;
            }
          }
          ++schedules;
        }
      }
    }
  }
  return {violations == 0, fmt("%d schedules, %lld (t,s) pairs, %lld violations, max ratio %.4f",
                               schedules, pairs, violations, worst)};
}

// AC3
Outcome bound_soundness() {
  auto doc = preset("fig1");
  doc["horizons"] = {2000};
  const auto cfg = parse_config(doc);
  const int horizon = 2000;
  const int n = cfg.agents;
  const auto set = cfg.make_set(cfg.dims.front());
  const auto stream = generate_ridge(n, cfg.dims.front(), horizon, cfg.loss_seed);
  const auto sched = generate_schedule(n, horizon, cfg.period, cfg.network_seed, cfg.topology);
  const auto x0 = default_initial_points(set, n);
  const auto trace = run(Algorithm::dofw, sched, stream, cfg.runs.front().step, x0, set);
  const auto comps = comparator_series(stream, horizon, set);
  const auto h = function_variation(stream, set, horizon);
  const auto d = gradient_variation(stream, set, horizon);
  const auto [lf, lg] = simplex_constants(stream, horizon + 1);

  oracle::BoundData b{n, std::sqrt(2.0), lf, lg, observed_zeta(sched), cfg.period,
                      trace.alpha(), 0, 0, 0, {}, {}};
  for (int i = 0; i < n; ++i) {
    b.x1.push_back(x0[i]);
    VectorXd mixed = VectorXd::Zero(set.dim());
    for (int j = 0; j < n; ++j) mixed += sched.matrices[0](i, j) * x0[j];
    b.g1.push_back(ridge_gradient(stream, i, 1, mixed));
  }
  std::vector<double> regret(n, 0.0);
  long long violations = 0;
  double worst = 0;
  for (int t = 1; t <= horizon; ++t) {
    const auto q = oracle::network_quadratic(stream, t);
    b.horizon = t;
    b.h_budget = h.prefix(t);
    b.d_budget = d.prefix(t);
    const double rhs = oracle::bound_rhs(b);
    for (int j = 0; j < n; ++j) {
      regret[j] += q(trace.x(j, t)) - comps.f_star[t - 1];
      worst = std::max(worst, regret[j] / rhs);
      if (regret[j] > rhs) ++violations;
    }
  }
  return {violations == 0,
          fmt("n=%d T=%d: %lld violations over %d prefixes x agents, max regret/rhs %.3g", n,
              horizon, violations, horizon * n, worst)};
}

// AC4
Outcome fig1_decay() {
  const std::vector<int> horizons{500, 1000, 2000, 4000};
  std::vector<double> mean(horizons.size(), 0.0);
  bool bracketed = true;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto doc = preset("fig1");
    doc["seed"] = seed;
    doc["horizons"] = horizons;
    doc["theory_checks"] = false;
    const auto result = run_experiment(parse_config(doc));
    for (std::size_t k = 0; k < horizons.size(); ++k) {
      const auto& r = result.cells[k].regret;
      mean[k] += r.average.back() / 3.0;
      for (int p = 0; p < r.horizon; ++p) {
        if (!(r.inf[p] <= r.average[p] && r.average[p] <= r.sup[p])) bracketed = false;
      }
    }
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < mean.size(); ++k) decreasing &= mean[k] < mean[k - 1];
  return {decreasing && bracketed,
          fmt("mean Regret/T over 3 seeds: T=500 %.4f, 1000 %.4f, 2000 %.4f, 4000 %.4f; "
              "envelopes bracket: %s",
              mean[0], mean[1], mean[2], mean[3], bracketed ? "yes" : "no")};
}

// AC5
Outcome static_sublinear() {
  const std::vector<int> horizons{500, 1000, 2000, 4000};
  auto doc = preset("fig1");
  doc["loss"]["kind"] = "static";
  doc["horizons"] = horizons;
  doc["theory_checks"] = false;
  doc["runs"] = nlohmann::json::array(
      {{{"label", "static"}, {"algorithm", "dofw"},
        {"step", {{"kind", "budget"}, {"gamma", 1.0}, {"H", "measured"}}}}});
  const auto result = run_experiment(parse_config(doc));
  const int n = result.cells.front().regret.agents;
  double worst = -INFINITY;
  bool positive = true;
  for (int j = 0; j < n; ++j) {
    std::vector<double> lx, ly;
    for (const auto& cell : result.cells) {
      const double r = cell.regret.cumulative(cell.horizon - 1, j);
      positive &= r > 0;
      lx.push_back(std::log(cell.horizon));
      ly.push_back(std::log(std::max(r, 1e-300)));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sxy += (lx[k] - mx) * (ly[k] - my);
      sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    worst = std::max(worst, sxy / sxx);
  }
  return {positive && worst <= kSlopeLimit,
          fmt("max over %d agents of log-log slope = %.4f (limit %.2f)", n, worst, kSlopeLimit)};
}

// AC6
Outcome dimension_comparison() {
  auto doc = preset("fig2");
  doc["loss"]["d"] = 160;
  doc["theory_checks"] = false;
  const auto result = run_experiment(parse_config(doc));
  double fw_ns = 0, gd_ns = 0;
  int fw_cells = 0, gd_cells = 0;
  double fw_best = INFINITY, gd_best = INFINITY;
  std::string per_step;
  for (const auto& cell : result.cells) {
    const double r = cell.regret.average.back();
    per_step += fmt(" %s=%.3f", cell.label.c_str(), r);
    if (cell.algorithm == Algorithm::dofw) {
      fw_ns += cell.mean_round_ns;
      ++fw_cells;
      fw_best = std::min(fw_best, r);
    } else {
      gd_ns += cell.mean_round_ns;
      ++gd_cells;
      gd_best = std::min(gd_best, r);
    }
  }
  fw_ns /= fw_cells;
  gd_ns /= gd_cells;
  const double ratio = fw_best / gd_best;
  const bool faster = fw_ns <= gd_ns;
  const bool similar = ratio <= kRegretRatioLimit;
  return {faster && similar,
          fmt("d=160 T=2000: round time dofw %.0f ns vs dogd %.0f ns (%s); best Regret/T ratio "
              "dofw/dogd = %.3f (limit %.1f, %s);",
              fw_ns, gd_ns, faster ? "ok" : "slower", ratio, kRegretRatioLimit,
              similar ? "ok" : "exceeded") +
              per_step};
}

// AC7
Outcome comparator_grid() {
  const auto stream = generate_ridge(20, 3, 20, 2024);
  const auto set = FeasibleSet::simplex(3);
  double worst = 0;
  for (int t = 1; t <= 20; ++t) {
    const double solver = per_round_optimum(stream, t, set).value;
    const double grid = oracle::grid_minimum_simplex3(oracle::network_quadratic(stream, t),
                                                      kGridStep);
    worst = std::max(worst, std::abs(solver - grid));
  }
  return {worst <= kGridTol,
          fmt("20 rounds, max |F(solver) - F(grid)| = %.3g (tol %.0e)", worst, kGridTol)};
}

// AC8
Outcome gradient_check() {
  const auto stream = generate_ridge(20, 8, 50, 99);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> agent(0, 19), round(1, 50);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const int i = agent(rng), t = round(rng);
    VectorXd x(8);
    for (int c = 0; c < 8; ++c) x[c] = coord(rng);
    const VectorXd g = stream.gradient(i, t, x);
    const VectorXd fd = oracle::central_difference(stream, i, t, x, kFiniteDifferenceStep);
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
  }
  return {worst <= kGradientRelTol,
          fmt("100 samples, max relative error %.3g (tol %.0e)", worst, kGradientRelTol)};
}

// AC9
Outcome lemma_suite() {
  int runs = 0;
  long long violations = 0;
  double worst[3] = {0, 0, 0};
  for (int n : {1, 2, 5, 20}) {
    for (Topology topo : kTopologies) {
      const int q = min_period(n, topo), horizon = 300, dim = 8;
      const auto sched = generate_schedule(n, horizon, q, 3 + n, topo);
      const auto stream = generate_ridge(n, dim, horizon, 17 + n);
      const auto set = FeasibleSet::simplex(dim);
      const auto x0 = default_initial_points(set, n);
      RunOptions opts;
      opts.full_diagnostics = true;
      const auto trace =
          run(Algorithm::dofw, sched, stream, StepSchedule::power(0.25, 0.4), x0, set, opts);
      const auto dvar = gradient_variation(stream, set, horizon);
      const auto [lf, lg] = simplex_constants(stream, horizon + 1);
      (void)lf;
      const auto [sigma, gamma] = oracle::mixing_constants(observed_zeta(sched), n, q);
      const double k = gamma / (1 - sigma), m = std::sqrt(2.0), alpha = trace.alpha();
      double sx = 0, sg = 0;
      for (int i = 0; i < n; ++i) {
        sx += x0[i].norm();
        sg += trace.initial_gradients().col(i).norm();
      }
      double cons = 0, cons_prev = 0, delta = 0, track = 0, dbudget = 0;
      for (int t = 1; t <= horizon; ++t) {
        VectorXd x_avg = VectorXd::Zero(dim), g_avg = VectorXd::Zero(dim);
        for (int j = 0; j < n; ++j) {
          x_avg += trace.x(j, t) / n;
          g_avg += trace.local_gradient(j, t) / n;
        }
        cons_prev = cons;
        for (int i = 0; i < n; ++i) {
          cons += (trace.x_mixed(i, t) - x_avg).norm();
          track += (trace.tracked(i, t) - g_avg).norm();
          if (t > 1) delta += (trace.local_gradient(i, t) - trace.local_gradient(i, t - 1)).norm();
        }
        dbudget += dvar.per_round[t - 1];
        if (t < 2) continue;
        const double rhs[3] = {n * k * sx + alpha * t * n * n * m * k,
                               2 * lg * cons_prev + n * dbudget + n * m * lg * alpha * t,
                               n * k * sg + n * k * delta};
        const double lhs[3] = {cons, delta, track};
        for (int c = 0; c < 3; ++c) {
          if (lhs[c] > rhs[c]) ++violations;
          worst[c] = std::max(worst[c], lhs[c] / rhs[c]);
        }
      }
      ++runs;
    }
  }
  return {violations == 0,
          fmt("%d runs, %lld violations; max lhs/rhs: consensus %.3g, gradient difference %.3g, "
              "tracking %.3g",
              runs, violations, worst[0], worst[1], worst[2])};
}

// AC10
Outcome static_budgets() {
  const auto base = generate_ridge(20, 8, 500, 8);
  const auto stream = static_stream(base, 1, 501);
  std::string detail;
  bool pass = true;
  for (const auto& set : {FeasibleSet::simplex(8), FeasibleSet::l1_ball(8, 1.0),
                          FeasibleSet::box(8, 0.0, 1.0)}) {
    const double h = function_variation(stream, set, 500).total();
    const double d = gradient_variation(stream, set, 500).total();
    pass &= h == 0.0 && d == 0.0;
    detail += fmt("%s: H_T=%g D_T=%g; ", set.name().c_str(), h, d);
  }
  return {pass, detail + "T=500"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", conservation},        {"AC2", ergodicity},     {"AC3", bound_soundness},
      {"AC4", fig1_decay},          {"AC5", static_sublinear}, {"AC6", dimension_comparison},
      {"AC7", comparator_grid},     {"AC8", gradient_check}, {"AC9", lemma_suite},
      {"AC10", static_budgets}};
  std::vector<std::string> selected(argv + 1, argv + argc);
  bool all_pass = true;
  for (const auto& [id, fn] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%-4s %s  %s  [%.2f s]\n", id.c_str(), out.pass ? "PASS" : "FAIL",
                out.detail.c_str(), secs);
    std::fflush(stdout);
    all_pass &= out.pass;
  }
  return all_pass ? 0 : 1;
}
