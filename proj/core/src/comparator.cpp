#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "dofw/csv.hpp"
#include "dofw/metrics.hpp"
#include "parallel.hpp"

namespace dofw {

namespace {

// Primal active-set method for min 1/2 x'Hx - c'x over the unit simplex.
// Returns nothing when an equality-constrained subproblem is singular.
std::optional<RoundOptimum> active_set_simplex(const QuadraticObjective& f, double tol) {
  const Eigen::Index d = f.linear.size();
  Vector x = Vector::Constant(d, 1.0 / d);
  std::vector<bool> free(static_cast<std::size_t>(d), true);
  const double scale = 1.0 + f.hessian.cwiseAbs().maxCoeff() + f.linear.cwiseAbs().maxCoeff();
  const double release_threshold = std::max(1e-13 * scale, 1e-3 * tol);
  const int max_iterations = static_cast<int>(10 * d + 100);

  std::vector<Eigen::Index> support;
  for (int iter = 0; iter < max_iterations; ++iter) {
    support.clear();
    for (Eigen::Index k = 0; k < d; ++k) {
      if (free[static_cast<std::size_t>(k)]) support.push_back(k);
    }
    const auto m = static_cast<Eigen::Index>(support.size());

    // [H_SS 1; 1' 0] [y; mu] = [c_S; 1]
    Matrix kkt = Matrix::Zero(m + 1, m + 1);
    Vector rhs(m + 1);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) kkt(a, b) = f.hessian(support[a], support[b]);
      kkt(a, m) = 1.0;
      kkt(m, a) = 1.0;
      rhs[a] = f.linear[support[a]];
    }
    rhs[m] = 1.0;
    const Eigen::PartialPivLU<Matrix> lu(kkt);
    const Vector solution = lu.solve(rhs);
    if (!solution.allFinite() ||
        (kkt * solution - rhs).cwiseAbs().maxCoeff() > 1e-8 * scale * (1.0 + solution.norm())) {
      return std::nullopt;
    }

    Eigen::Index blocking = -1;
    double step = 1.0;
    for (Eigen::Index a = 0; a < m; ++a) {
      const double y = solution[a];
      const double current = x[support[a]];
      if (y < -1e-13 && current - y > 0) {
        const double ratio = current / (current - y);
        if (ratio < step) {
          step = ratio;
          blocking = support[a];
        }
      }
    }

    if (blocking < 0) {
      x.setZero();
      for (Eigen::Index a = 0; a < m; ++a) x[support[a]] = std::max(solution[a], 0.0);
      const Vector g = f.gradient(x);
      double level = 0.0;
      for (Eigen::Index a = 0; a < m; ++a) level += x[support[a]] * g[support[a]];
      Eigen::Index entering = -1;
      double best = level - release_threshold;
      for (Eigen::Index k = 0; k < d; ++k) {
        if (!free[static_cast<std::size_t>(k)] && g[k] < best) {
          best = g[k];
          entering = k;
        }
      }
      if (entering < 0) {
        RoundOptimum out;
        out.x = std::move(x);
        out.iterations = iter + 1;
        return out;
      }
      free[static_cast<std::size_t>(entering)] = true;
    } else {
      for (Eigen::Index a = 0; a < m; ++a) {
        x[support[a]] += step * (solution[a] - x[support[a]]);
      }
      x[blocking] = 0.0;
      free[static_cast<std::size_t>(blocking)] = false;
      for (Eigen::Index a = 0; a < m; ++a) {
        if (x[support[a]] <= 0.0) {
          x[support[a]] = 0.0;
          free[static_cast<std::size_t>(support[a])] = false;
        }
      }
    }
  }
  return std::nullopt;
}

// Exact minimiser on the face of `set` that x appears to lie on: coordinates
// within `eps` of a bound are pinned, the rest solve the reduced KKT system.
// The result is pulled back into the set; the caller certifies it.
std::optional<Vector> polish_on_face(const QuadraticObjective& f, const FeasibleSet& set,
                                     const Vector& x, double eps) {
  const Eigen::Index d = x.size();
  std::vector<Eigen::Index> support;
  Vector pinned = Vector::Zero(d);
  Vector sign = Vector::Zero(d);
  bool on_boundary = false;
  double total = 0.0;

  if (const auto* box = std::get_if<Box>(&set.kind())) {
    const Vector g = f.gradient(x);
    for (Eigen::Index k = 0; k < d; ++k) {
      if (x[k] <= box->lo + eps && g[k] >= 0) {
        pinned[k] = box->lo;
      } else if (x[k] >= box->hi - eps && g[k] <= 0) {
        pinned[k] = box->hi;
      } else {
        support.push_back(k);
      }
    }
  } else {
    double radius = 1.0;
    if (const auto* ball = std::get_if<L1Ball>(&set.kind())) radius = ball->radius;
    for (Eigen::Index k = 0; k < d; ++k) {
      if (std::abs(x[k]) > eps) {
        support.push_back(k);
        sign[k] = x[k] > 0 ? 1.0 : -1.0;
      }
    }
    on_boundary = std::holds_alternative<Simplex>(set.kind()) ||
                  x.lpNorm<1>() >= radius - eps * static_cast<double>(d);
    total = radius;
  }

  const auto m = static_cast<Eigen::Index>(support.size());
  if (m == 0) return pinned;
  const Eigen::Index rows = m + (on_boundary ? 1 : 0);
  const Vector shifted = f.linear - f.hessian * pinned;
  Matrix kkt = Matrix::Zero(rows, rows);
  Vector rhs = Vector::Zero(rows);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) kkt(a, b) = f.hessian(support[a], support[b]);
    rhs[a] = shifted[support[a]];
    if (on_boundary) {
      kkt(a, m) = sign[support[a]];
      kkt(m, a) = sign[support[a]];
    }
  }
  if (on_boundary) rhs[m] = total;
  const Vector solution = kkt.fullPivLu().solve(rhs);
  if (!solution.allFinite()) return std::nullopt;

  Vector y = pinned;
  for (Eigen::Index a = 0; a < m; ++a) y[support[a]] = solution[a];
  return set.project(y);
}

// Accelerated projected gradient with adaptive restart, interleaved with face
// polishing. Plain Frank-Wolfe zig-zags when the optimum sits on a face of a
// box or l1 ball and never gets near a 1e-8 gap.
RoundOptimum projected_gradient(const QuadraticObjective& f, const FeasibleSet& set, Vector x,
                                double tol) {
  const Eigen::Index d = x.size();
  // Power iteration for the largest eigenvalue, padded; capped by Gershgorin.
  Vector probe = Vector::Ones(d) / std::sqrt(static_cast<double>(d));
  double lambda = 0.0;
  for (int k = 0; k < 60; ++k) {
    const Vector next = f.hessian * probe;
    const double norm = next.norm();
    if (norm == 0.0) break;
    lambda = norm;
    probe = next / norm;
  }
  const double gershgorin = f.hessian.cwiseAbs().rowwise().sum().maxCoeff();
  const double floor = 1e-12 * (1.0 + f.linear.cwiseAbs().maxCoeff());
  const double lipschitz = std::max(std::min(1.1 * lambda, gershgorin), floor);
  const double step = 1.0 / lipschitz;

  RoundOptimum out;
  const auto certify = [&](const Vector& candidate) {
    return frank_wolfe_gap(f.gradient(candidate), candidate, set) <= tol;
  };
  // Linear or nearly linear objectives: a vertex is often already optimal.
  if (Vector vertex = set.lmo(-f.linear); certify(vertex)) {
    out.x = std::move(vertex);
    return out;
  }
  x = set.project(x);
  Vector y = x;
  double momentum = 1.0;
  double value = f.value(x);
  const long long cap = 200000;
  for (long long k = 1; k <= cap; ++k) {
    const Vector next = set.project(y - step * f.gradient(y));
    const double next_value = f.value(next);
    if (next_value > value) {
      // Restart: drop momentum and take a plain step from x.
      momentum = 1.0;
      y = x;
      continue;
    }
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = next + ((momentum - 1.0) / next_momentum) * (next - x);
    momentum = next_momentum;
    x = next;
    value = next_value;

    if (k % 50 == 0) {
      if (certify(x)) {
        out.x = std::move(x);
        out.iterations = static_cast<int>(k);
        return out;
      }
      for (double eps : {1e-6, 1e-9, 1e-12}) {
        auto polished = polish_on_face(f, set, x, eps);
        if (polished && certify(*polished)) {
          out.x = *std::move(polished);
          out.iterations = static_cast<int>(k);
          return out;
        }
      }
    }
  }
  throw std::runtime_error("comparator: no point with gap below " + csv::format(tol) +
                           " within " + std::to_string(cap) + " iterations");
}

}  // namespace

double frank_wolfe_gap(const Vector& gradient, const Vector& x, const FeasibleSet& set) {
  const Vector v = set.lmo(gradient);
  return gradient.dot(x - v);
}

RoundOptimum minimize_quadratic(const QuadraticObjective& objective, const FeasibleSet& set,
                                double tol) {
  if (!(tol > 0)) throw std::invalid_argument("comparator: tolerance must be positive");
  if (objective.linear.size() != set.dim() || objective.hessian.rows() != set.dim() ||
      objective.hessian.cols() != set.dim()) {
    throw std::invalid_argument("comparator: objective and set dimensions differ");
  }

  std::optional<RoundOptimum> result;
  if (std::holds_alternative<Simplex>(set.kind())) result = active_set_simplex(objective, tol);
  if (result && frank_wolfe_gap(objective.gradient(result->x), result->x, set) > tol) {
    const int previous = result->iterations;
    result = projected_gradient(objective, set, result->x, tol);
    result->iterations += previous;
  } else if (!result) {
    result = projected_gradient(objective, set, Vector::Zero(set.dim()), tol);
  }
  result->gap = frank_wolfe_gap(objective.gradient(result->x), result->x, set);
  if (result->gap > tol) {
    throw std::runtime_error("comparator: certified gap " + csv::format(result->gap) +
                             " exceeds tolerance");
  }
  result->value = objective.value(result->x);
  return *std::move(result);
}

RoundOptimum per_round_optimum(const LossStream& stream, Round t, const FeasibleSet& set,
                               double tol) {
  RoundOptimum out = minimize_quadratic(stream.round_objective(t), set, tol);
  out.value = stream.network_value(t, out.x);
  return out;
}

ComparatorSeries comparator_series(const LossStream& stream, int horizon, const FeasibleSet& set,
                                   double tol) {
  if (horizon < 1 || horizon > stream.rounds()) {
    throw std::invalid_argument("comparator: horizon outside the stream");
  }
  ComparatorSeries series;
  series.tolerance = tol;
  series.x_star.resize(static_cast<std::size_t>(horizon));
  series.f_star.resize(static_cast<std::size_t>(horizon));
  series.gap.resize(static_cast<std::size_t>(horizon));
  detail::parallel_for(horizon, [&](int k) {
    auto opt = per_round_optimum(stream, k + 1, set, tol);
    const auto idx = static_cast<std::size_t>(k);
    series.f_star[idx] = opt.value;
    series.gap[idx] = opt.gap;
    series.x_star[idx] = std::move(opt.x);
  });
  return series;
}

}  // namespace dofw
