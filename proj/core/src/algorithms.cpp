#include "dofw/algorithms.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "dofw/csv.hpp"

namespace dofw {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<int> processing_order(int n, std::span<const int> order) {
  if (order.empty()) {
    std::vector<int> identity(static_cast<std::size_t>(n));
    std::iota(identity.begin(), identity.end(), 0);
    return identity;
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  if (static_cast<int>(order.size()) != n) {
    throw std::invalid_argument("round: processing order must be a permutation of the agents");
  }
  for (int i : order) {
    if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)]) {
      throw std::invalid_argument("round: processing order must be a permutation of the agents");
    }
    seen[static_cast<std::size_t>(i)] = true;
  }
  return {order.begin(), order.end()};
}

void check_round_inputs(const std::vector<AgentState>& states, const Matrix& mixing,
                        const LossStream& stream, const FeasibleSet& set) {
  const auto n = static_cast<Eigen::Index>(states.size());
  if (n == 0) throw std::invalid_argument("round: no agents");
  if (mixing.rows() != n || mixing.cols() != n) {
    throw std::invalid_argument("round: mixing matrix is not n x n");
  }
  if (stream.agents() != n) throw std::invalid_argument("round: stream agent count differs");
  if (stream.dim() != set.dim()) throw std::invalid_argument("round: stream/set dimension differ");
  for (const auto& s : states) {
    if (s.x.size() != set.dim()) throw std::invalid_argument("round: state dimension mismatch");
  }
}

// out.col(i) = sum_j A_ij in.col(j), skipping structural zeros.
void mix(const Matrix& a, const Matrix& in, Matrix& out, const std::vector<int>& order) {
  const Eigen::Index n = a.rows();
  for (int i : order) {
    auto target = out.col(i);
    target.setZero();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = a(i, j);
      if (w != 0.0) target.noalias() += w * in.col(j);
    }
  }
}

RoundRecord make_record(const std::vector<AgentState>& states, Round t, double alpha, int dim) {
  const auto n = static_cast<Eigen::Index>(states.size());
  RoundRecord rec;
  rec.t = t;
  rec.alpha = alpha;
  rec.x.resize(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) rec.x.col(i) = states[static_cast<std::size_t>(i)].x;
  rec.x_mixed.resize(dim, n);
  rec.local_gradient.resize(dim, n);
  rec.x_next.resize(dim, n);
  return rec;
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "dofw") return Algorithm::dofw;
  if (name == "dogd") return Algorithm::dogd;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::dofw ? "dofw" : "dogd";
}

double alpha_at(const StepSchedule& step, int horizon) {
  if (horizon < 1) throw std::invalid_argument("step schedule: T must be >= 1");
  const double t = horizon;
  double alpha = 0.0;
  switch (step.kind) {
    case StepSchedule::Kind::constant: alpha = step.scale; break;
    case StepSchedule::Kind::power: alpha = step.scale / std::pow(t, step.exponent); break;
    case StepSchedule::Kind::budget:
      if (step.budget < 0) throw std::invalid_argument("step schedule: negative budget estimate");
      alpha = step.scale * std::sqrt((step.budget + 1.0) / t);
      break;
    case StepSchedule::Kind::estimated_budget:
      alpha = step.scale * std::sqrt((std::pow(t, step.exponent) + 1.0) / t);
      break;
  }
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("step schedule: step size must be positive, got " +
                                csv::format(alpha));
  }
  return std::min(alpha, 1.0);
}

std::vector<AgentState> initial_states(std::span<const Vector> x_init) {
  std::vector<AgentState> states;
  states.reserve(x_init.size());
  for (const auto& x : x_init) states.push_back(AgentState{x, std::nullopt, std::nullopt, 1});
  return states;
}

RoundRecord dofw_round(std::vector<AgentState>& states, const Matrix& mixing,
                       const LossStream& stream, Round t, double alpha, const FeasibleSet& set,
                       std::span<const int> order) {
  check_round_inputs(states, mixing, stream, set);
  if (!(alpha > 0 && alpha <= 1)) {
    throw std::invalid_argument("dofw round: alpha must lie in (0, 1], got " + csv::format(alpha));
  }
  const int n = static_cast<int>(states.size());
  const int d = set.dim();
  if (t > 1) {
    for (const auto& s : states) {
      if (!s.tracked_gradient || !s.last_local_gradient) {
        throw std::logic_error("dofw round: tracking memory missing at round " +
                               std::to_string(t));
      }
    }
  }
  const auto agents = processing_order(n, order);
  RoundRecord rec = make_record(states, t, alpha, d);
  rec.corrected.resize(d, n);
  rec.tracked.resize(d, n);
  rec.vertex.resize(d, n);

  const auto start = Clock::now();
  mix(mixing, rec.x, rec.x_mixed, agents);
  for (int i : agents) {
    stream.gradient_into(i, t, rec.x_mixed.col(i), rec.local_gradient.col(i));
    if (t == 1) {
      rec.corrected.col(i) = rec.local_gradient.col(i);
    } else {
      const auto& s = states[static_cast<std::size_t>(i)];
      rec.corrected.col(i) =
          *s.tracked_gradient + rec.local_gradient.col(i) - *s.last_local_gradient;
    }
  }
  mix(mixing, rec.corrected, rec.tracked, agents);
  for (int i : agents) {
    rec.vertex.col(i) = set.lmo(rec.tracked.col(i));
    rec.x_next.col(i) = rec.x_mixed.col(i) + alpha * (rec.vertex.col(i) - rec.x_mixed.col(i));
  }
  rec.elapsed_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();

  for (int i = 0; i < n; ++i) {
    auto& s = states[static_cast<std::size_t>(i)];
    s.x = rec.x_next.col(i);
    s.tracked_gradient = rec.tracked.col(i);
    s.last_local_gradient = rec.local_gradient.col(i);
    s.valid_from = t + 1;
  }
  return rec;
}

RoundRecord dogd_round(std::vector<AgentState>& states, const Matrix& mixing,
                       const LossStream& stream, Round t, double alpha, const FeasibleSet& set,
                       DogdVariant variant, std::span<const int> order) {
  check_round_inputs(states, mixing, stream, set);
  if (!(alpha >= 0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("dogd round: alpha must be finite and >= 0, got " +
                                csv::format(alpha));
  }
  const int n = static_cast<int>(states.size());
  const auto agents = processing_order(n, order);
  RoundRecord rec = make_record(states, t, alpha, set.dim());

  const auto start = Clock::now();
  mix(mixing, rec.x, rec.x_mixed, agents);
  for (int i : agents) {
    if (variant == DogdVariant::gradient_at_mixed) {
      stream.gradient_into(i, t, rec.x_mixed.col(i), rec.local_gradient.col(i));
    } else {
      stream.gradient_into(i, t, rec.x.col(i), rec.local_gradient.col(i));
    }
    rec.x_next.col(i) = set.project(rec.x_mixed.col(i) - alpha * rec.local_gradient.col(i));
  }
  rec.elapsed_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();

  for (int i = 0; i < n; ++i) {
    auto& s = states[static_cast<std::size_t>(i)];
    s.x = rec.x_next.col(i);
    s.last_local_gradient = rec.local_gradient.col(i);
    s.valid_from = t + 1;
  }
  return rec;
}

RunTrace::RunTrace(Algorithm algorithm, int agents, int dim, int horizon, double alpha,
                   bool full_diagnostics)
    : algorithm_(algorithm),
      agents_(agents),
      dim_(dim),
      horizon_(horizon),
      alpha_(alpha),
      full_(full_diagnostics) {
  const Eigen::Index columns = static_cast<Eigen::Index>(agents) * horizon;
  played_.resize(dim, columns);
  if (full_) {
    mixed_.resize(dim, columns);
    gradient_.resize(dim, columns);
    if (algorithm == Algorithm::dofw) {
      corrected_.resize(dim, columns);
      tracked_.resize(dim, columns);
      vertex_.resize(dim, columns);
    }
  }
  initial_gradients_.resize(dim, agents);
  stats_.reserve(static_cast<std::size_t>(horizon));
  round_ns_.reserve(static_cast<std::size_t>(horizon));
}

Eigen::Index RunTrace::column(AgentIndex i, Round t) const {
  if (i < 0 || i >= agents_ || t < 1 || t > horizon_) {
    throw std::out_of_range("run trace: (i=" + std::to_string(i) + ", t=" + std::to_string(t) +
                            ") outside the trace");
  }
  return static_cast<Eigen::Index>(t - 1) * agents_ + i;
}

void RunTrace::require_diagnostics() const {
  if (!full_) throw std::logic_error("run trace: full diagnostics were not recorded");
}

Eigen::Ref<const Vector> RunTrace::x_mixed(AgentIndex i, Round t) const {
  require_diagnostics();
  return mixed_.col(column(i, t));
}

Eigen::Ref<const Vector> RunTrace::local_gradient(AgentIndex i, Round t) const {
  require_diagnostics();
  return gradient_.col(column(i, t));
}

Eigen::Ref<const Vector> RunTrace::corrected(AgentIndex i, Round t) const {
  require_diagnostics();
  if (algorithm_ != Algorithm::dofw) throw std::logic_error("run trace: no tracking in dogd");
  return corrected_.col(column(i, t));
}

Eigen::Ref<const Vector> RunTrace::tracked(AgentIndex i, Round t) const {
  require_diagnostics();
  if (algorithm_ != Algorithm::dofw) throw std::logic_error("run trace: no tracking in dogd");
  return tracked_.col(column(i, t));
}

Eigen::Ref<const Vector> RunTrace::vertex(AgentIndex i, Round t) const {
  require_diagnostics();
  if (algorithm_ != Algorithm::dofw) throw std::logic_error("run trace: no vertices in dogd");
  return vertex_.col(column(i, t));
}

void RunTrace::record(const RoundRecord& rec, const RoundStats& stats) {
  const Round t = rec.t;
  if (t != static_cast<Round>(stats_.size()) + 1) {
    throw std::logic_error("run trace: rounds must be recorded in order");
  }
  const Eigen::Index first = column(0, t);
  played_.middleCols(first, agents_) = rec.x;
  if (full_) {
    mixed_.middleCols(first, agents_) = rec.x_mixed;
    gradient_.middleCols(first, agents_) = rec.local_gradient;
    if (algorithm_ == Algorithm::dofw) {
      corrected_.middleCols(first, agents_) = rec.corrected;
      tracked_.middleCols(first, agents_) = rec.tracked;
      vertex_.middleCols(first, agents_) = rec.vertex;
    }
  }
  if (t == 1) initial_gradients_ = rec.local_gradient;
  stats_.push_back(stats);
  round_ns_.push_back(rec.elapsed_ns);
}

namespace {

RoundStats round_stats(const RoundRecord& rec, const Matrix* previous_gradient,
                       const FeasibleSet& set, bool tracking) {
  RoundStats s;
  const Eigen::Index n = rec.x.cols();
  const Vector x_avg = rec.x.rowwise().mean();
  const Vector grad_avg = rec.local_gradient.rowwise().mean();
  for (Eigen::Index i = 0; i < n; ++i) {
    s.consensus_error += (rec.x_mixed.col(i) - x_avg).norm();
    if (previous_gradient) {
      s.delta_norm_sum += (rec.local_gradient.col(i) - previous_gradient->col(i)).norm();
    }
    s.infeasibility = std::max({s.infeasibility, set.infeasibility(rec.x_next.col(i)),
                                set.infeasibility(rec.x_mixed.col(i))});
  }
  if (tracking) {
    const Vector grad_sum = rec.local_gradient.rowwise().sum();
    s.conservation_error = (rec.corrected.rowwise().sum() - rec.local_gradient.rowwise().sum())
                               .cwiseAbs()
                               .maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      s.tracking_error += (rec.tracked.col(i) - grad_avg).norm();
      s.tracking_sum_error += (grad_sum - rec.tracked.col(i)).norm();
      s.infeasibility = std::max(s.infeasibility, set.infeasibility(rec.vertex.col(i)));
    }
    const Vector v_avg = rec.vertex.rowwise().mean();
    const Vector predicted = x_avg + rec.alpha * (v_avg - x_avg);
    s.average_step_error = (rec.x_next.rowwise().mean() - predicted).cwiseAbs().maxCoeff();
  }
  return s;
}

}  // namespace

RunTrace run(Algorithm algorithm, const MixingSchedule& schedule, const LossStream& stream,
             const StepSchedule& step, std::span<const Vector> x_init, const FeasibleSet& set,
             const RunOptions& options) {
  const int horizon = schedule.horizon();
  const int n = schedule.agents;
  if (horizon < 1) throw std::invalid_argument("run: empty schedule");
  if (stream.agents() != n) throw std::invalid_argument("run: schedule and stream disagree on n");
  if (stream.rounds() < horizon) {
    throw std::invalid_argument("run: stream has fewer rounds than the schedule horizon");
  }
  if (static_cast<int>(x_init.size()) != n) {
    throw std::invalid_argument("run: need one initial point per agent");
  }
  for (const auto& x : x_init) {
    if (x.size() != set.dim() || !set.contains(x)) {
      throw std::invalid_argument("run: initial point is not in the feasible set");
    }
  }
  const double alpha = alpha_at(step, horizon);

  RunTrace trace(algorithm, n, set.dim(), horizon, alpha, options.full_diagnostics);
  auto states = initial_states(x_init);
  Matrix previous_gradient;
  for (Round t = 1; t <= horizon; ++t) {
    const Matrix& a = schedule.at(t);
    RoundRecord rec = algorithm == Algorithm::dofw
                          ? dofw_round(states, a, stream, t, alpha, set)
                          : dogd_round(states, a, stream, t, alpha, set, options.dogd_variant);
    const RoundStats stats = round_stats(rec, t > 1 ? &previous_gradient : nullptr, set,
                                         algorithm == Algorithm::dofw);
    previous_gradient = rec.local_gradient;
    trace.record(rec, stats);
  }
  return trace;
}

std::vector<Vector> default_initial_points(const FeasibleSet& set, int agents) {
  const Vector start = set.lmo(-Vector::Unit(set.dim(), 0));
  return std::vector<Vector>(static_cast<std::size_t>(agents), start);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  std::vector<std::string> header{"t", "i"};
  for (int k = 1; k <= trace.dim(); ++k) header.push_back("x_" + std::to_string(k));
  header.push_back("round_time_ns");
  csv::write_row(out, header);
  for (Round t = 1; t <= trace.horizon(); ++t) {
    for (AgentIndex i = 0; i < trace.agents(); ++i) {
      std::vector<std::string> row{std::to_string(t), std::to_string(i)};
      const auto x = trace.x(i, t);
      for (int k = 0; k < trace.dim(); ++k) row.push_back(csv::format(x[k]));
      row.push_back(std::to_string(trace.round_ns(t)));
      csv::write_row(out, row);
    }
  }
}

void write_trace_diagnostics_csv(std::ostream& out, const RunTrace& trace) {
  if (!trace.has_diagnostics()) {
    throw std::logic_error("diagnostics csv: trace has no full diagnostics");
  }
  const bool tracking = trace.algorithm() == Algorithm::dofw;
  std::vector<std::string> header{"t", "i"};
  auto block = [&](const std::string& prefix) {
    for (int k = 1; k <= trace.dim(); ++k) header.push_back(prefix + std::to_string(k));
  };
  block("x_");
  block("xhat_");
  block("grad_");
  if (tracking) {
    block("corrected_");
    block("tracked_");
    block("v_");
  }
  csv::write_row(out, header);
  for (Round t = 1; t <= trace.horizon(); ++t) {
    for (AgentIndex i = 0; i < trace.agents(); ++i) {
      std::vector<std::string> row{std::to_string(t), std::to_string(i)};
      auto append = [&](Eigen::Ref<const Vector> v) {
        for (Eigen::Index k = 0; k < v.size(); ++k) row.push_back(csv::format(v[k]));
      };
      append(trace.x(i, t));
      append(trace.x_mixed(i, t));
      append(trace.local_gradient(i, t));
      if (tracking) {
        append(trace.corrected(i, t));
        append(trace.tracked(i, t));
        append(trace.vertex(i, t));
      }
      csv::write_row(out, row);
    }
  }
}

}  // namespace dofw
