#include "dofw/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <stdexcept>
#include <utility>

#include "dofw/csv.hpp"

namespace dofw {

namespace {

constexpr double kStochasticTol = 1e-12;

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { reset(); }

  void reset() { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;  // root is always the smallest member
  }

 private:
  std::vector<int> parent_;
};

// Symmetric Metropolis weights on an undirected edge list. For a matching
// this is the lazy pairwise gossip matrix I - 1/2 (e_u - e_v)(e_u - e_v)^T.
Matrix metropolis(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> degree(n, 0);
  for (auto [u, v] : edges) {
    ++degree[u];
    ++degree[v];
  }
  Matrix a = Matrix::Zero(n, n);
  for (auto [u, v] : edges) {
    const double w = 1.0 / (1.0 + std::max(degree[u], degree[v]));
    a(u, v) += w;
    a(v, u) += w;
  }
  for (int i = 0; i < n; ++i) a(i, i) = 1.0 - a.row(i).sum();
  return a;
}

double min_positive_entry(const std::vector<Matrix>& matrices) {
  double zeta = std::numeric_limits<double>::infinity();
  for (const auto& a : matrices) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      const double v = a.data()[k];
      if (v > 0 && v < zeta) zeta = v;
    }
  }
  return std::isfinite(zeta) ? zeta : 0.0;
}

std::vector<std::vector<bool>> empty_adjacency(int n) {
  return std::vector<std::vector<bool>>(n, std::vector<bool>(n, false));
}

std::vector<bool> reachable_from(const std::vector<std::vector<bool>>& adj, int source,
                                 bool reverse) {
  const int n = static_cast<int>(adj.size());
  std::vector<bool> seen(n, false);
  std::queue<int> frontier;
  frontier.push(source);
  seen[source] = true;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int w = 0; w < n; ++w) {
      // adj[i][j] encodes the edge j -> i.
      const bool edge = reverse ? adj[u][w] : adj[w][u];
      if (edge && !seen[w]) {
        seen[w] = true;
        frontier.push(w);
      }
    }
  }
  return seen;
}

}  // namespace

Topology parse_topology(std::string_view name) {
  if (name == "cycle_split") return Topology::cycle_split;
  if (name == "random_gossip") return Topology::random_gossip;
  if (name == "static_complete") return Topology::static_complete;
  throw std::invalid_argument("unknown topology '" + std::string(name) + "'");
}

std::string_view to_string(Topology topology) {
  switch (topology) {
    case Topology::cycle_split: return "cycle_split";
    case Topology::random_gossip: return "random_gossip";
    case Topology::static_complete: return "static_complete";
  }
  return "unknown";
}

const Matrix& MixingSchedule::at(Round t) const {
  if (t < 1 || t > horizon()) {
    throw std::out_of_range("mixing schedule: round " + std::to_string(t) + " outside [1, " +
                            std::to_string(horizon()) + "]");
  }
  return matrices[static_cast<std::size_t>(t - 1)];
}

int min_period(int agents, Topology topology) {
  // any n-1 consecutive cycle edges form a Hamiltonian path
  if (topology == Topology::cycle_split && agents >= 3) return agents - 1;
  return 1;
}

MixingSchedule generate_schedule(int agents, int horizon, int period, std::uint64_t seed,
                                 Topology topology) {
  if (agents < 1) throw std::invalid_argument("network: n must be >= 1");
  if (horizon < 1) throw std::invalid_argument("network: T must be >= 1");
  if (period < 1) throw std::invalid_argument("network: Q must be >= 1");
  if (period < min_period(agents, topology)) {
    throw std::invalid_argument(
        "network: cycle_split over n=" + std::to_string(agents) + " agents needs Q >= " +
        std::to_string(min_period(agents, topology)) +
        " so that every Q-window union is strongly connected (got Q=" + std::to_string(period) +
        ")");
  }

  MixingSchedule schedule;
  schedule.agents = agents;
  schedule.period = period;
  schedule.matrices.reserve(static_cast<std::size_t>(horizon));
  const int n = agents;

  if (n == 1) {
    schedule.matrices.assign(static_cast<std::size_t>(horizon), Matrix::Ones(1, 1));
  } else if (topology == Topology::static_complete) {
    schedule.matrices.assign(static_cast<std::size_t>(horizon),
                             Matrix::Constant(n, n, 1.0 / n));
  } else if (topology == Topology::cycle_split) {
    // Hamiltonian cycle 0-1-...-(n-1)-0; round t activates edge (t-1) mod m.
    const int edge_count = n == 2 ? 1 : n;
    for (Round t = 1; t <= horizon; ++t) {
      const int u = (t - 1) % edge_count;
      const int v = (u + 1) % n;
      schedule.matrices.push_back(metropolis(n, {{u, v}}));
    }
  } else {
    std::mt19937_64 rng(seed);
    std::vector<int> order(static_cast<std::size_t>(n));
    DisjointSets window(n);
    for (Round t = 1; t <= horizon; ++t) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<std::pair<int, int>> edges;
      for (int k = 0; k + 1 < n; k += 2) {
        edges.emplace_back(std::min(order[k], order[k + 1]), std::max(order[k], order[k + 1]));
        window.unite(order[k], order[k + 1]);
      }
      if (t % period == 0) {
        // Chain the component roots so the window union is connected.
        std::vector<int> roots;
        for (int v = 0; v < n; ++v) {
          if (window.find(v) == v) roots.push_back(v);
        }
        for (std::size_t k = 0; k + 1 < roots.size(); ++k) {
          edges.emplace_back(roots[k], roots[k + 1]);
        }
        window.reset();
      }
      std::sort(edges.begin(), edges.end());
      schedule.matrices.push_back(metropolis(n, edges));
    }
  }
  schedule.zeta = min_positive_entry(schedule.matrices);
  return schedule;
}

bool strongly_connected(const std::vector<std::vector<bool>>& adjacency) {
  if (adjacency.empty()) return true;
  const auto forward = reachable_from(adjacency, 0, false);
  const auto backward = reachable_from(adjacency, 0, true);
  return std::all_of(forward.begin(), forward.end(), [](bool b) { return b; }) &&
         std::all_of(backward.begin(), backward.end(), [](bool b) { return b; });
}

ScheduleReport certify_schedule(const MixingSchedule& schedule) {
  ScheduleReport report;
  const int n = schedule.agents;
  auto fail = [&](ScheduleViolation::Kind kind, Round t, int index, std::string detail) {
    report.ok = false;
    report.violations.push_back({kind, t, index, std::move(detail)});
  };

  report.zeta_observed = min_positive_entry(schedule.matrices);
  const double zeta = schedule.zeta > 0 ? schedule.zeta : report.zeta_observed;
  if (!(zeta > 0)) fail(ScheduleViolation::Kind::entry_below_zeta, 0, -1, "no positive entries");

  for (Round t = 1; t <= schedule.horizon(); ++t) {
    const Matrix& a = schedule.at(t);
    if (a.rows() != n || a.cols() != n) {
      fail(ScheduleViolation::Kind::shape, t, -1, "matrix is not n x n");
      continue;
    }
    for (int i = 0; i < n; ++i) {
      const double row = a.row(i).sum();
      if (std::abs(row - 1.0) > kStochasticTol) {
        fail(ScheduleViolation::Kind::row_sum, t, i, "row sums to " + csv::format(row));
      }
      const double col = a.col(i).sum();
      if (std::abs(col - 1.0) > kStochasticTol) {
        fail(ScheduleViolation::Kind::column_sum, t, i, "column sums to " + csv::format(col));
      }
      if (!(a(i, i) > 0)) {
        fail(ScheduleViolation::Kind::diagonal_not_positive, t, i, "zero diagonal");
      }
      for (int j = 0; j < n; ++j) {
        const double v = a(i, j);
        if (v < 0) {
          fail(ScheduleViolation::Kind::negative_entry, t, i, "negative entry at column " +
                                                                  std::to_string(j));
        } else if (v > 0 && v < zeta) {
          fail(ScheduleViolation::Kind::entry_below_zeta, t, i,
               "entry " + csv::format(v) + " below zeta at column " + std::to_string(j));
        }
      }
    }
  }

  const int q = schedule.period;
  if (q >= 1) {
    for (int k = 0; (k + 1) * q <= schedule.horizon(); ++k) {
      auto adj = empty_adjacency(n);
      for (Round t = k * q + 1; t <= (k + 1) * q; ++t) {
        const Matrix& a = schedule.at(t);
        if (a.rows() != n || a.cols() != n) continue;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            if (a(i, j) > 0) adj[i][j] = true;
          }
        }
      }
      if (!strongly_connected(adj)) {
        fail(ScheduleViolation::Kind::window_not_connected, k * q + 1, k,
             "union over rounds [" + std::to_string(k * q + 1) + ", " +
                 std::to_string((k + 1) * q) + "] is not strongly connected");
      }
    }
  } else {
    fail(ScheduleViolation::Kind::window_not_connected, 0, -1, "period must be >= 1");
  }
  return report;
}

Matrix transition_matrix(const MixingSchedule& schedule, Round t, Round s) {
  if (s < 1 || t < s || t > schedule.horizon()) {
    throw std::out_of_range("transition matrix: need 1 <= s <= t <= T, got s=" +
                            std::to_string(s) + ", t=" + std::to_string(t));
  }
  Matrix phi = schedule.at(s);
  for (Round r = s + 1; r <= t; ++r) phi = schedule.at(r) * phi;
  return phi;
}

ErgodicityConstants ErgodicityConstants::from(double zeta, int agents, int period) {
  const double n = agents;
  const double base = 1.0 - zeta / (4.0 * n * n);
  if (!(base > 0) || !(base < 1) || period < 1) {
    throw std::domain_error("ergodicity constants: need 0 < zeta < 4n^2 and Q >= 1");
  }
  ErgodicityConstants c;
  c.sigma = std::pow(base, 1.0 / period);
  c.gamma_cap = std::pow(base, (1.0 - 2.0 * period) / period);
  return c;
}

ErgodicityReport check_ergodicity_bound(const MixingSchedule& schedule, int max_lag) {
  const auto cert = certify_schedule(schedule);
  if (!cert.ok) {
    throw std::invalid_argument("ergodicity check: schedule fails certification (" +
                                cert.violations.front().detail + ")");
  }
  const double zeta = schedule.zeta > 0 ? schedule.zeta : cert.zeta_observed;
  const auto constants = ErgodicityConstants::from(zeta, schedule.agents, schedule.period);
  const double uniform = 1.0 / schedule.agents;
  const int horizon = schedule.horizon();

  ErgodicityReport report;
  for (Round s = 1; s <= horizon; ++s) {
    Matrix phi = schedule.at(s);
    const Round last = std::min(horizon, s + std::max(max_lag, 0));
    for (Round t = s; t <= last; ++t) {
      if (t > s) phi = schedule.at(t) * phi;
      const double rhs = constants.gamma_cap * std::pow(constants.sigma, t - s);
      const double lhs = (phi.array() - uniform).abs().maxCoeff();
      report.max_ratio = std::max(report.max_ratio, lhs / rhs);
      report.pairs_checked += static_cast<long long>(phi.size());
    }
  }
  report.ok = report.max_ratio <= 1.0;
  return report;
}

void write_schedule_csv(std::ostream& out, const MixingSchedule& schedule) {
  std::vector<std::string> header{"t", "i"};
  for (int j = 0; j < schedule.agents; ++j) header.push_back("w_" + std::to_string(j));
  csv::write_row(out, header);
  for (Round t = 1; t <= schedule.horizon(); ++t) {
    const Matrix& a = schedule.at(t);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      std::vector<std::string> row{std::to_string(t), std::to_string(i)};
      for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(csv::format(a(i, j)));
      csv::write_row(out, row);
    }
  }
}

}  // namespace dofw
