#include "dofw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dofw/csv.hpp"
#include "dofw/network.hpp"
#include "parallel.hpp"

namespace dofw {

BoundTerms regret_bound(const BoundInputs& in) {
  if (!(in.alpha > 0 && in.alpha <= 1)) {
    throw std::domain_error("regret bound: alpha must lie in (0, 1]");
  }
  if (static_cast<int>(in.x_init.size()) != in.agents ||
      static_cast<int>(in.initial_gradients.size()) != in.agents) {
    throw std::invalid_argument("regret bound: need one initial point and gradient per agent");
  }
  const auto ergodic = ErgodicityConstants::from(in.zeta, in.agents, in.period);
  const double n = in.agents;
  const double m = in.diameter;
  const double lf = in.lipschitz_function;
  const double lg = in.lipschitz_gradient;
  const double sigma = ergodic.sigma;
  const double gamma = ergodic.gamma_cap;
  const double mixing = gamma / (1.0 - sigma);

  Vector x_avg = Vector::Zero(in.x_init.front().size());
  for (const auto& x : in.x_init) x_avg += x;
  x_avg /= n;
  double spread = 0.0, x_norms = 0.0, grad_norms = 0.0;
  for (int i = 0; i < in.agents; ++i) {
    spread += (in.x_init[i] - x_avg).norm();
    x_norms += in.x_init[i].norm();
    grad_norms += in.initial_gradients[i].norm();
  }

  BoundTerms out;
  out.sigma = sigma;
  out.gamma_cap = gamma;
  out.c1 = n * lf * spread + 2.0 * m * n * mixing * grad_norms +
           (n * lf + 2.0 * m * lg + 4.0 * m * n * lg * mixing) * n * mixing * x_norms;
  out.c2 = 2.0 * n * n * lf * m +
           (4.0 * m * lg + n * lf + 4.0 * m * n * lg * mixing) * n * n * m * mixing +
           n * lg * m * m / 2.0;
  out.c3 = n * lf * m;
  out.c4 = 2.0 * m * n * n * mixing + n * m;
  out.rhs = out.c1 + out.c2 * in.alpha * in.horizon +
            (2.0 * n / in.alpha) * in.function_variation + out.c3 / in.alpha +
            out.c4 * in.gradient_variation;
  return out;
}

BoundInputs bound_inputs_for(const RunTrace& trace, const MixingSchedule& schedule,
                             std::span<const Vector> x_init, const FeasibleSet& set,
                             const LipschitzConstants& constants) {
  BoundInputs in;
  in.agents = trace.agents();
  in.diameter = set.diameter();
  in.lipschitz_function = constants.function;
  in.lipschitz_gradient = constants.gradient;
  in.zeta = schedule.zeta > 0 ? schedule.zeta : certify_schedule(schedule).zeta_observed;
  in.period = schedule.period;
  in.alpha = trace.alpha();
  in.horizon = trace.horizon();
  in.x_init.assign(x_init.begin(), x_init.end());
  for (int i = 0; i < trace.agents(); ++i) {
    in.initial_gradients.push_back(trace.initial_gradients().col(i));
  }
  return in;
}

RegretReport dynamic_regret(const RunTrace& trace, const LossStream& stream,
                            const ComparatorSeries& comparators, RegretPoint point) {
  const int horizon = trace.horizon();
  const int n = trace.agents();
  if (comparators.horizon() < horizon || stream.rounds() < horizon || stream.agents() != n) {
    throw std::invalid_argument("dynamic regret: trace, stream and comparators disagree on (n, T)");
  }
  if (point == RegretPoint::mixed && !trace.has_diagnostics()) {
    throw std::logic_error("dynamic regret: charging xhat needs full diagnostics");
  }
  Matrix per_round(horizon, n);
  detail::parallel_for(horizon, [&](int k) {
    const Round t = k + 1;
    for (AgentIndex j = 0; j < n; ++j) {
      const double cost = point == RegretPoint::played ? stream.network_value(t, trace.x(j, t))
                                                       : stream.network_value(t, trace.x_mixed(j, t));
      per_round(k, j) = cost - comparators.f_star[static_cast<std::size_t>(k)];
    }
  });

  RegretReport report;
  report.agents = n;
  report.horizon = horizon;
  report.cumulative.resize(horizon, n);
  report.average.resize(static_cast<std::size_t>(horizon));
  report.sup.resize(static_cast<std::size_t>(horizon));
  report.inf.resize(static_cast<std::size_t>(horizon));
  for (int k = 0; k < horizon; ++k) {
    report.cumulative.row(k) = per_round.row(k);
    if (k > 0) report.cumulative.row(k) += report.cumulative.row(k - 1);
    const double prefix = k + 1;
    const auto row = report.cumulative.row(k);
    const double hi = row.maxCoeff(), lo = row.minCoeff();
    // sum/n can land an ulp outside [min, max] when all agents agree
    report.average[static_cast<std::size_t>(k)] = std::clamp(row.mean(), lo, hi) / prefix;
    report.sup[static_cast<std::size_t>(k)] = hi / prefix;
    report.inf[static_cast<std::size_t>(k)] = lo / prefix;
  }
  return report;
}

void attach_budgets(RegretReport& report, const VariationSeries& function_variation,
                    const VariationSeries& gradient_variation, const BoundInputs* base) {
  const auto horizon = static_cast<std::size_t>(report.horizon);
  if (function_variation.cumulative.size() < horizon ||
      gradient_variation.cumulative.size() < horizon) {
    throw std::invalid_argument("attach budgets: variation series shorter than the trace");
  }
  report.function_variation.assign(function_variation.cumulative.begin(),
                                   function_variation.cumulative.begin() + horizon);
  report.gradient_variation.assign(gradient_variation.cumulative.begin(),
                                   gradient_variation.cumulative.begin() + horizon);
  report.bound_rhs.clear();
  if (!base) return;
  BoundInputs in = *base;
  for (std::size_t k = 0; k < horizon; ++k) {
    in.horizon = static_cast<int>(k + 1);
    in.function_variation = report.function_variation[k];
    in.gradient_variation = report.gradient_variation[k];
    report.bound_rhs.push_back(regret_bound(in).rhs);
  }
}

void write_regret_csv(std::ostream& out, const RegretReport& report) {
  std::vector<std::string> header{"T_prime", "avg_regret_over_T", "sup_envelope", "inf_envelope",
                                  "H_T",     "D_T",               "bound_rhs"};
  const Eigen::Index agents = report.cumulative.cols();
  for (Eigen::Index j = 0; j < agents; ++j) header.push_back("regret_" + std::to_string(j));
  csv::write_row(out, header);
  auto optional = [](const std::vector<double>& v, std::size_t k) {
    return k < v.size() ? csv::format(v[k]) : std::string();
  };
  std::vector<std::string> row;
  for (std::size_t k = 0; k < static_cast<std::size_t>(report.horizon); ++k) {
    row = {std::to_string(k + 1),          csv::format(report.average[k]),
           csv::format(report.sup[k]),     csv::format(report.inf[k]),
           optional(report.function_variation, k),
           optional(report.gradient_variation, k), optional(report.bound_rhs, k)};
    for (Eigen::Index j = 0; j < agents; ++j) {
      row.push_back(csv::format(report.cumulative(static_cast<Eigen::Index>(k), j)));
    }
    csv::write_row(out, row);
  }
}

ConsensusSeries consensus_diagnostics(const RunTrace& trace) {
  if (trace.algorithm() != Algorithm::dofw) {
    throw std::logic_error("consensus diagnostics: trace carries no tracked gradients");
  }
  ConsensusSeries out;
  for (Round t = 1; t <= trace.horizon(); ++t) {
    const auto& s = trace.stats(t);
    out.consensus.push_back(s.consensus_error);
    out.tracking.push_back(s.tracking_error);
    out.delta.push_back(s.delta_norm_sum);
    out.tracking_sum.push_back(s.tracking_sum_error);
  }
  return out;
}

void write_diagnostics_csv(std::ostream& out, const ConsensusSeries& series) {
  csv::write_row(out, {"t", "consensus_err", "grad_consensus_err", "delta_sum"});
  for (std::size_t k = 0; k < series.consensus.size(); ++k) {
    csv::write_row(out, {std::to_string(k + 1), csv::format(series.consensus[k]),
                         csv::format(series.tracking[k]), csv::format(series.delta[k])});
  }
}

namespace {

class PrefixCheck {
 public:
  explicit PrefixCheck(std::string name) { check_.name = std::move(name); }

  void observe(Round prefix, double lhs, double rhs) {
    const double ratio = rhs > 0 ? lhs / rhs : (lhs > 0 ? INFINITY : 0.0);
    if (lhs > rhs) check_.ok = false;
    if (check_.worst_prefix == 0 || ratio > check_.worst_ratio) {
      check_.worst_ratio = ratio;
      check_.worst_prefix = prefix;
      check_.lhs = lhs;
      check_.rhs = rhs;
    }
  }

  LemmaCheck result() const { return check_; }

 private:
  LemmaCheck check_;
};

}  // namespace

std::vector<LemmaCheck> lemma_checks(const LemmaInputs& in) {
  if (!in.trace || !in.series || !in.gradient_variation) {
    throw std::invalid_argument("lemma checks: trace, series and gradient variation required");
  }
  const auto& trace = *in.trace;
  const auto& series = *in.series;
  const int horizon = trace.horizon();
  const auto ergodic = ErgodicityConstants::from(in.bound.zeta, in.bound.agents, in.bound.period);
  const double n = in.bound.agents;
  const double m = in.bound.diameter;
  const double lg = in.bound.lipschitz_gradient;
  const double lf = in.bound.lipschitz_function;
  const double alpha = in.bound.alpha;
  const double mixing = ergodic.gamma_cap / (1.0 - ergodic.sigma);

  double x_norms = 0.0, grad_norms = 0.0;
  for (const auto& x : in.bound.x_init) x_norms += x.norm();
  for (const auto& g : in.bound.initial_gradients) grad_norms += g.norm();

  const bool with_regret = in.comparators && in.stream && in.function_variation;
  PrefixCheck consensus("consensus error");
  PrefixCheck delta("gradient difference");
  PrefixCheck tracking("gradient tracking error");
  PrefixCheck averaged("averaged-decision regret");

  double sum_consensus = 0.0;       // sum_{t<=T'} consensus(t)
  double sum_consensus_prev = 0.0;  // sum_{t<=T'-1} consensus(t)
  double sum_delta = 0.0;           // sum_{2<=t<=T'} delta(t)
  double sum_tracking = 0.0;
  double sum_tracking_sum_prev = 0.0;
  double sum_avg_regret = 0.0;
  for (Round t = 1; t <= horizon; ++t) {
    const auto k = static_cast<std::size_t>(t - 1);
    sum_consensus_prev = sum_consensus;
    sum_consensus += series.consensus[k];
    if (t >= 2) sum_delta += series.delta[k];
    sum_tracking += series.tracking[k];
    if (with_regret) {
      Vector x_avg = Vector::Zero(trace.dim());
      for (AgentIndex i = 0; i < trace.agents(); ++i) x_avg += trace.x(i, t);
      x_avg /= n;
      sum_avg_regret += in.stream->network_value(t, x_avg) - in.comparators->f_star[k];
    }
    if (t >= 2) {
      const double d_budget = in.gradient_variation->prefix(t);
      consensus.observe(t, sum_consensus, mixing * n * x_norms + alpha * t * n * n * m * mixing);
      delta.observe(t, sum_delta,
                    2.0 * lg * sum_consensus_prev + n * d_budget + n * m * lg * alpha * t);
      tracking.observe(t, sum_tracking, n * mixing * grad_norms + n * mixing * sum_delta);
      if (with_regret) {
        const double h_budget = in.function_variation->prefix(t);
        averaged.observe(t, sum_avg_regret,
                         2.0 * n / alpha * h_budget + n * lf * m / alpha +
                             2.0 * m * sum_tracking_sum_prev + 2.0 * m * lg * sum_consensus_prev +
                             n * lg * m * m / 2.0 * alpha * t + n * m * d_budget);
      }
    }
    sum_tracking_sum_prev += series.tracking_sum[k];
  }
  std::vector<LemmaCheck> out{consensus.result(), delta.result(), tracking.result()};
  if (with_regret) out.push_back(averaged.result());
  return out;
}

std::vector<TimingRow> timing_report(std::span<const RunTrace* const> traces) {
  std::vector<TimingRow> rows;
  for (const RunTrace* trace : traces) {
    TimingRow row;
    row.algorithm = trace->algorithm();
    row.dim = trace->dim();
    row.horizon = trace->horizon();
    for (Round t = 1; t <= trace->horizon(); ++t) row.total_ns += double(trace->round_ns(t));
    row.mean_round_ns = row.total_ns / trace->horizon();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dofw
