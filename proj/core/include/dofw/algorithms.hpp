#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dofw/feasible_set.hpp"
#include "dofw/losses.hpp"
#include "dofw/network.hpp"
#include "dofw/types.hpp"

namespace dofw {

enum class Algorithm { dofw, dogd };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algorithm);

/// Where the projected-gradient baseline evaluates its gradient.
enum class DogdVariant {
  gradient_at_mixed,  // x_{i,t+1} = P(xhat_{i,t} - alpha grad f_{i,t}(xhat_{i,t}))
  gradient_at_local,  // x_{i,t+1} = P(xhat_{i,t} - alpha grad f_{i,t}(x_{i,t}))
};

/// Constant step size alpha in (0, 1] derived from the horizon T.
struct StepSchedule {
  enum class Kind {
    constant,          // alpha = value
    power,             // alpha = scale / T^exponent
    budget,            // alpha = scale * sqrt((budget + 1) / T)
    estimated_budget,  // alpha = scale * sqrt((T^exponent + 1) / T)
  };

  Kind kind = Kind::constant;
  double scale = 1.0;
  double exponent = 0.0;
  double budget = 0.0;

  static StepSchedule constant(double alpha) { return {Kind::constant, alpha, 0.0, 0.0}; }
  static StepSchedule power(double c, double theta) { return {Kind::power, c, theta, 0.0}; }
  /// gamma * sqrt((H + 1)/T) for a function-variation estimate H.
  static StepSchedule budget_tuned(double gamma, double variation) {
    return {Kind::budget, gamma, 0.0, variation};
  }
  /// Budget tuning with an a-priori estimate H = T^theta.
  static StepSchedule estimated_budget(double gamma, double theta) {
    return {Kind::estimated_budget, gamma, theta, 0.0};
  }
};

/// Throws std::invalid_argument if the unclamped value is not positive;
/// otherwise returns min(value, 1).
double alpha_at(const StepSchedule& step, int horizon);

/// Per-agent engine memory.
struct AgentState {
  Vector x;                                // x_{i,t}
  std::optional<Vector> tracked_gradient;  // tracked gradient from round t-1
  std::optional<Vector> last_local_gradient;  // grad f_{i,t-1}(xhat_{i,t-1})
  Round valid_from = 1;                    // round whose decision `x` holds
};

std::vector<AgentState> initial_states(std::span<const Vector> x_init);

/// Everything one synchronous round produced; columns are agents.
struct RoundRecord {
  Round t = 0;
  double alpha = 0.0;
  Matrix x;               // pre-round decisions x_{i,t}
  Matrix x_mixed;         // xhat_{i,t}
  Matrix local_gradient;  // grad f_{i,t}(xhat_{i,t})  (DOGD: at its gradient point)
  Matrix corrected;       // gradient-tracking estimate before mixing (DOFW only)
  Matrix tracked;         // mixed tracked gradient fed to the LMO (DOFW only)
  Matrix vertex;          // LMO outputs v_{i,t} (DOFW only)
  Matrix x_next;          // x_{i,t+1}
  std::int64_t elapsed_ns = 0;
};

/// One round of distributed online Frank-Wolfe with gradient tracking. All
/// agents read the pre-round snapshot; `order` only permutes the processing
/// order and never changes the result.
RoundRecord dofw_round(std::vector<AgentState>& states, const Matrix& mixing,
                       const LossStream& stream, Round t, double alpha, const FeasibleSet& set,
                       std::span<const int> order = {});

/// One round of distributed online projected gradient descent.
RoundRecord dogd_round(std::vector<AgentState>& states, const Matrix& mixing,
                       const LossStream& stream, Round t, double alpha, const FeasibleSet& set,
                       DogdVariant variant = DogdVariant::gradient_at_mixed,
                       std::span<const int> order = {});

/// Cheap per-round checks computed while running.
struct RoundStats {
  double conservation_error = 0.0;  // max_k |sum_i corrected_i - sum_i grad_i|_k
  double consensus_error = 0.0;     // sum_i ||xhat_i - x_avg||
  double tracking_error = 0.0;      // sum_i ||tracked_i - mean_j grad_j||
  double tracking_sum_error = 0.0;  // sum_i ||sum_j grad_j - tracked_i||
  double delta_norm_sum = 0.0;      // sum_i ||grad_{i,t} - grad_{i,t-1}||, 0 at t = 1
  double average_step_error = 0.0;  // |x_avg,t+1 - (x_avg,t + alpha (v_avg,t - x_avg,t))|_inf
  double infeasibility = 0.0;       // max distance-to-set proxy of x, xhat, v
};

struct RunOptions {
  bool full_diagnostics = false;  // keep xhat, gradients, tracked gradients, vertices
  DogdVariant dogd_variant = DogdVariant::gradient_at_mixed;
};

/// Trace of a full run. Round-t, agent-i vectors live in column (t-1)*n + i.
class RunTrace {
 public:
  RunTrace(Algorithm algorithm, int agents, int dim, int horizon, double alpha,
           bool full_diagnostics);

  Algorithm algorithm() const { return algorithm_; }
  int agents() const { return agents_; }
  int dim() const { return dim_; }
  int horizon() const { return horizon_; }
  double alpha() const { return alpha_; }
  bool has_diagnostics() const { return full_; }

  Eigen::Ref<const Vector> x(AgentIndex i, Round t) const { return played_.col(column(i, t)); }
  Eigen::Ref<const Vector> x_mixed(AgentIndex i, Round t) const;
  Eigen::Ref<const Vector> local_gradient(AgentIndex i, Round t) const;
  Eigen::Ref<const Vector> corrected(AgentIndex i, Round t) const;
  Eigen::Ref<const Vector> tracked(AgentIndex i, Round t) const;
  Eigen::Ref<const Vector> vertex(AgentIndex i, Round t) const;

  /// First-round gradients grad f_{i,1}(xhat_{i,1}); always kept.
  const Matrix& initial_gradients() const { return initial_gradients_; }
  const RoundStats& stats(Round t) const { return stats_.at(static_cast<std::size_t>(t - 1)); }
  std::int64_t round_ns(Round t) const { return round_ns_.at(static_cast<std::size_t>(t - 1)); }

  void record(const RoundRecord& record, const RoundStats& stats);

 private:
  Eigen::Index column(AgentIndex i, Round t) const;
  void require_diagnostics() const;

  Algorithm algorithm_;
  int agents_;
  int dim_;
  int horizon_;
  double alpha_;
  bool full_;
  Matrix played_;
  Matrix mixed_, gradient_, corrected_, tracked_, vertex_;
  Matrix initial_gradients_;
  std::vector<RoundStats> stats_;
  std::vector<std::int64_t> round_ns_;
};

/// Runs T = schedule.horizon() rounds. x_init holds one feasible point per agent.
RunTrace run(Algorithm algorithm, const MixingSchedule& schedule, const LossStream& stream,
             const StepSchedule& step, std::span<const Vector> x_init, const FeasibleSet& set,
             const RunOptions& options = {});

/// Every agent starts at the first vertex e_1 (or the set's LMO vertex for -e_1).
std::vector<Vector> default_initial_points(const FeasibleSet& set, int agents);

/// Columns `t,i,x_1..x_d,round_time_ns`.
void write_trace_csv(std::ostream& out, const RunTrace& trace);
/// Adds xhat, gradient, tracked gradient and vertex blocks; needs full diagnostics.
void write_trace_diagnostics_csv(std::ostream& out, const RunTrace& trace);

}  // namespace dofw
