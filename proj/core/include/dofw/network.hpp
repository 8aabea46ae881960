#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dofw/types.hpp"

namespace dofw {

enum class Topology { cycle_split, random_gossip, static_complete };

Topology parse_topology(std::string_view name);
std::string_view to_string(Topology topology);

/// Time-varying mixing matrices A_1..A_T over n agents.
///
/// `zeta` is the lower bound on positive entries and `period` the joint
/// connectivity window Q: the union graph over every aligned window
/// [kQ+1, (k+1)Q] must be strongly connected. Nothing is validated on
/// construction; use certify_schedule().
struct MixingSchedule {
  int agents = 0;
  int period = 1;
  double zeta = 0.0;
  std::vector<Matrix> matrices;

  int horizon() const { return static_cast<int>(matrices.size()); }
  /// Round t is 1-based.
  const Matrix& at(Round t) const;
};

/// Smallest window length for which `topology` can be jointly connected.
int min_period(int agents, Topology topology);

/// Deterministic in (n, T, Q, seed, topology). Throws std::invalid_argument for
/// infeasible parameters, e.g. Q < n - 1 for cycle_split.
MixingSchedule generate_schedule(int agents, int horizon, int period, std::uint64_t seed,
                                 Topology topology);

struct ScheduleViolation {
  enum class Kind {
    negative_entry,
    row_sum,
    column_sum,
    diagonal_not_positive,
    entry_below_zeta,
    window_not_connected,
    shape
  };
  Kind kind;
  Round round;  // first round of the window for window_not_connected
  int index;    // row / column / window index, -1 if not applicable
  std::string detail;
};

struct ScheduleReport {
  bool ok = true;
  double zeta_observed = 0.0;  // min positive entry over all rounds
  std::vector<ScheduleViolation> violations;
};

/// Checks positivity bound, double stochasticity (1e-12), positive diagonals
/// and strong connectivity of each complete Q-window union.
ScheduleReport certify_schedule(const MixingSchedule& schedule);

/// Phi(t, s) = A_t A_{t-1} ... A_s for t >= s >= 1.
Matrix transition_matrix(const MixingSchedule& schedule, Round t, Round s);

/// sigma = (1 - zeta/(4n^2))^(1/Q), gamma_cap = (1 - zeta/(4n^2))^((1-2Q)/Q).
struct ErgodicityConstants {
  double sigma = 0.0;
  double gamma_cap = 0.0;

  static ErgodicityConstants from(double zeta, int agents, int period);
};

struct ErgodicityReport {
  double max_ratio = 0.0;  // max |Phi_ij - 1/n| / (Gamma sigma^(t-s))
  bool ok = true;
  long long pairs_checked = 0;
};

/// Exhaustive check of |[Phi(t,s)]_ij - 1/n| <= Gamma sigma^(t-s) over every
/// t - s <= max_lag. Throws std::invalid_argument if the schedule fails
/// certification.
ErgodicityReport check_ergodicity_bound(const MixingSchedule& schedule, int max_lag);

/// Header `t,i,w_0..w_{n-1}`: row i of A_t, one row per agent, rounds in order.
void write_schedule_csv(std::ostream& out, const MixingSchedule& schedule);

/// True iff the digraph with edge j -> i whenever adjacency(i, j) is set is
/// strongly connected.
bool strongly_connected(const std::vector<std::vector<bool>>& adjacency);

}  // namespace dofw
