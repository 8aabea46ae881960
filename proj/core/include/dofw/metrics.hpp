#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dofw/algorithms.hpp"
#include "dofw/feasible_set.hpp"
#include "dofw/losses.hpp"
#include "dofw/types.hpp"

namespace dofw {

// ---------------------------------------------------------------------------
// Comparator

/// max_{v in set} <g, x - v>; zero exactly at a constrained minimizer.
double frank_wolfe_gap(const Vector& gradient, const Vector& x, const FeasibleSet& set);

struct RoundOptimum {
  Vector x;
  double value = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

/// Minimizes a convex quadratic over the set and certifies the result by its
/// Frank-Wolfe gap. On the simplex an exact primal active-set method is used;
/// other sets (and singular simplex subproblems) use accelerated projected
/// gradient with exact solves on the identified face. Throws
/// std::runtime_error if the gap stays above `tol`.
RoundOptimum minimize_quadratic(const QuadraticObjective& objective, const FeasibleSet& set,
                                double tol = 1e-8);

/// x_t* and F_t(x_t*) for the network objective of round t.
RoundOptimum per_round_optimum(const LossStream& stream, Round t, const FeasibleSet& set,
                               double tol = 1e-8);

struct ComparatorSeries {
  std::vector<Vector> x_star;  // index t-1
  std::vector<double> f_star;
  std::vector<double> gap;
  double tolerance = 0.0;

  int horizon() const { return static_cast<int>(f_star.size()); }
};

ComparatorSeries comparator_series(const LossStream& stream, int horizon, const FeasibleSet& set,
                                   double tol = 1e-8);

// ---------------------------------------------------------------------------
// Variation budgets

struct VariationSeries {
  std::vector<double> per_round;   // f_{t,sup} or g_{t,sup}, index t-1
  std::vector<double> cumulative;  // running sum, index t-1
  bool exact = true;  // false when the maximum came from a local search

  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  /// Budget over the first `prefix` rounds; 0 for prefix 0.
  double prefix(int rounds) const;
};

/// max_x |f_{i,t+1}(x) - f_{i,t}(x)| for one agent. For the simplex and L1
/// ball the difference of two ridge losses depends on x only through
/// (a'x, b'x), and both signs of it are convex along one of those axes, so
/// the maximum sits on the boundary of the 2-D image polygon and every hull
/// edge is scanned in closed form. Boxes use vertices plus multi-start ascent.
double function_change(const RidgeStream& stream, const FeasibleSet& set, AgentIndex i, Round t,
                       bool* exact = nullptr);

/// max_x ||grad f_{i,t+1}(x) - grad f_{i,t}(x)||, exact by vertex enumeration
/// (the difference is affine in x).
double gradient_change(const RidgeStream& stream, const FeasibleSet& set, AgentIndex i, Round t);

/// Local search for max_x |f_{i,t+1}(x) - f_{i,t}(x)|: the set's vertices plus
/// `starts` projected-gradient ascents per sign. A lower bound on the true value.
double ascent_function_change(const RidgeStream& stream, const FeasibleSet& set, AgentIndex i,
                              Round t, int starts = 20);

/// Function variation H over rounds 1..horizon; needs horizon + 1 stream rounds.
VariationSeries function_variation(const RidgeStream& stream, const FeasibleSet& set,
                                   int horizon);
/// Gradient variation D over rounds 1..horizon; needs horizon + 1 stream rounds.
VariationSeries gradient_variation(const RidgeStream& stream, const FeasibleSet& set,
                                   int horizon);

// ---------------------------------------------------------------------------
// Regret bound

struct BoundInputs {
  int agents = 1;
  double diameter = 0.0;            // M
  double lipschitz_function = 0.0;  // L_X
  double lipschitz_gradient = 0.0;  // G_X
  double zeta = 0.0;
  int period = 1;  // Q
  double alpha = 1.0;
  int horizon = 1;
  double function_variation = 0.0;  // H_T
  double gradient_variation = 0.0;  // D_T
  std::vector<Vector> x_init;             // x_{i,1}
  std::vector<Vector> initial_gradients;  // grad f_{i,1}(xhat_{i,1})
};

struct BoundTerms {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  double sigma = 0.0;
  double gamma_cap = 0.0;
  double rhs = 0.0;
};

/// C1 + C2 alpha T + (2n/alpha) H_T + C3/alpha + C4 D_T.
/// Throws std::domain_error when zeta >= 4 n^2 or alpha is outside (0, 1].
BoundTerms regret_bound(const BoundInputs& inputs);

/// Bound inputs for a finished run; horizon/budgets are filled per prefix by callers.
BoundInputs bound_inputs_for(const RunTrace& trace, const MixingSchedule& schedule,
                             std::span<const Vector> x_init, const FeasibleSet& set,
                             const LipschitzConstants& constants);

// ---------------------------------------------------------------------------
// Dynamic regret

enum class RegretPoint { played, mixed };

struct RegretReport {
  int agents = 0;
  int horizon = 0;
  Matrix cumulative;            // (T, n): Regret^j(T') at row T'-1
  std::vector<double> average;  // mean_j Regret^j(T') / T'
  std::vector<double> sup;      // max_j Regret^j(T') / T'
  std::vector<double> inf;      // min_j Regret^j(T') / T'
  // Optional companions filled by attach_budgets.
  std::vector<double> function_variation;
  std::vector<double> gradient_variation;
  std::vector<double> bound_rhs;
};

/// Regret^j(T') = sum_{t<=T'} F_t(x_{j,t}) - F_t(x_t*). `mixed` charges the
/// post-consensus point instead and needs full diagnostics.
RegretReport dynamic_regret(const RunTrace& trace, const LossStream& stream,
                            const ComparatorSeries& comparators,
                            RegretPoint point = RegretPoint::played);

/// Fills per-prefix H, D and the regret-bound right-hand side. `base` supplies
/// every bound input except horizon and budgets.
void attach_budgets(RegretReport& report, const VariationSeries& function_variation,
                    const VariationSeries& gradient_variation, const BoundInputs* base);

/// Columns `T_prime,avg_regret_over_T,sup_envelope,inf_envelope,H_T,D_T,bound_rhs`,
/// then the cumulative regret `regret_<j>` of each agent j (0-based).
void write_regret_csv(std::ostream& out, const RegretReport& report);

// ---------------------------------------------------------------------------
// Consensus diagnostics and lemma checks

struct ConsensusSeries {
  std::vector<double> consensus;    // sum_i ||xhat_{i,t} - x_avg,t||
  std::vector<double> tracking;     // sum_i ||tracked_{i,t} - mean_j grad_{j,t}||
  std::vector<double> delta;        // sum_i ||delta_{i,t}||, 0 at t = 1
  std::vector<double> tracking_sum; // sum_i ||sum_j grad_{j,t} - tracked_{i,t}||
};

/// Per-round series from a DOFW trace; throws for traces without tracking.
ConsensusSeries consensus_diagnostics(const RunTrace& trace);

/// Columns `t,consensus_err,grad_consensus_err,delta_sum`.
void write_diagnostics_csv(std::ostream& out, const ConsensusSeries& series);

struct LemmaCheck {
  std::string name;
  bool ok = true;
  Round worst_prefix = 0;
  double lhs = 0.0;  // at the worst prefix
  double rhs = 0.0;
  double worst_ratio = 0.0;  // max over prefixes of lhs / rhs
};

struct LemmaInputs {
  const RunTrace* trace = nullptr;
  const ConsensusSeries* series = nullptr;
  const LossStream* stream = nullptr;
  const ComparatorSeries* comparators = nullptr;  // needed for the averaged-regret check
  const VariationSeries* function_variation = nullptr;
  const VariationSeries* gradient_variation = nullptr;
  BoundInputs bound;  // constants; horizon and budgets ignored
};

/// Checks, for every prefix T' >= 2: consensus error, gradient-difference,
/// gradient-tracking error and averaged-regret inequalities.
std::vector<LemmaCheck> lemma_checks(const LemmaInputs& inputs);

// ---------------------------------------------------------------------------
// Timing

struct TimingRow {
  Algorithm algorithm;
  int dim = 0;
  int horizon = 0;
  double mean_round_ns = 0.0;
  double total_ns = 0.0;
};

std::vector<TimingRow> timing_report(std::span<const RunTrace* const> traces);

}  // namespace dofw
