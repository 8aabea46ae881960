#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dofw/metrics.hpp"
#include "parallel.hpp"

namespace dofw {

namespace {

struct Point2 {
  double u;
  double w;
  bool operator<(const Point2& o) const { return u < o.u || (u == o.u && w < o.w); }
  bool operator==(const Point2& o) const { return u == o.u && w == o.w; }
};

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.u - o.u) * (b.w - o.w) - (a.w - o.w) * (b.u - o.u);
}

// Andrew's monotone chain; counter-clockwise, no repeated first point.
std::vector<Point2> convex_hull(std::vector<Point2> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() <= 2) return points;
  std::vector<Point2> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    const auto& p = points[i];
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

// g(u, w) = 1/2 (w - m)^2 - 1/2 (u - l)^2 maximized in absolute value on the
// segment p -> q.
double max_abs_on_segment(const Point2& p, const Point2& q, double l, double m) {
  const double eu = p.u - l, ew = p.w - m;
  const double du = q.u - p.u, dw = q.w - p.w;
  auto g = [&](double s) {
    const double a = ew + s * dw;
    const double b = eu + s * du;
    return 0.5 * (a - b) * (a + b);
  };
  double best = std::max(std::abs(g(0.0)), std::abs(g(1.0)));
  const double curvature = dw * dw - du * du;
  if (curvature != 0.0) {
    const double s = -(ew * dw - eu * du) / curvature;
    if (s > 0.0 && s < 1.0) best = std::max(best, std::abs(g(s)));
  }
  return best;
}

// Vertex scale factors: simplex vertices e_k, L1-ball vertices +/- r e_k.
std::vector<double> axis_scales(const FeasibleSet& set) {
  if (std::holds_alternative<Simplex>(set.kind())) return {1.0};
  if (const auto* ball = std::get_if<L1Ball>(&set.kind())) return {ball->radius, -ball->radius};
  return {};
}

void check_pair(const RidgeStream& stream, const FeasibleSet& set, AgentIndex i, Round t) {
  if (set.dim() != stream.dim()) {
    throw std::invalid_argument("variation: set and stream dimensions differ");
  }
  if (i < 0 || i >= stream.agents() || t < 1 || t + 1 > stream.rounds()) {
    throw std::out_of_range("variation: need rounds t and t+1 in the stream (t=" +
                            std::to_string(t) + ", rounds=" + std::to_string(stream.rounds()) +
                            ")");
  }
}

double difference_value(const Vector& a, double l, const Vector& b, double m, const Vector& x) {
  const double r1 = a.dot(x) - l;
  const double r2 = b.dot(x) - m;
  return 0.5 * (r2 - r1) * (r2 + r1);
}

VariationSeries accumulate(std::vector<double> per_round, bool exact) {
  VariationSeries out;
  out.exact = exact;
  out.cumulative.resize(per_round.size());
  double running = 0.0;
  for (std::size_t k = 0; k < per_round.size(); ++k) {
    running += per_round[k];
    out.cumulative[k] = running;
  }
  out.per_round = std::move(per_round);
  return out;
}

void check_horizon(const RidgeStream& stream, int horizon) {
  if (horizon < 0 || horizon + 1 > stream.rounds()) {
    throw std::invalid_argument("variation: horizon " + std::to_string(horizon) +
                                " needs " + std::to_string(horizon + 1) +
                                " stream rounds, stream has " + std::to_string(stream.rounds()));
  }
}

}  // namespace

double VariationSeries::prefix(int rounds) const {
  if (rounds <= 0) return 0.0;
  return cumulative.at(static_cast<std::size_t>(rounds - 1));
}

double ascent_function_change(const RidgeStream& stream, const FeasibleSet& set, AgentIndex i,
                              Round t, int starts) {
  check_pair(stream, set, i, t);
  const Vector a = stream.feature(i, t);
  const Vector b = stream.feature(i, t + 1);
  const double l = stream.label(i, t);
  const double m = stream.label(i, t + 1);
  const double lipschitz = a.squaredNorm() + b.squaredNorm();

  double best = 0.0;
  for (const auto& v : set.vertices()) {
    best = std::max(best, std::abs(difference_value(a, l, b, m, v)));
  }
  if (lipschitz == 0.0) return best;

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ (static_cast<std::uint64_t>(t) << 20) ^
                      static_cast<std::uint64_t>(i));
  for (const double sign : {1.0, -1.0}) {
    for (int s = 0; s < starts; ++s) {
      Vector x = set.sample(rng);
      for (int iter = 0; iter < 500; ++iter) {
        const Vector ascent = sign * (b * (b.dot(x) - m) - a * (a.dot(x) - l));
        Vector next = set.project(x + ascent / lipschitz);
        const double moved = (next - x).norm();
        x = std::move(next);
        if (moved < 1e-12) break;
      }
      best = std::max(best, std::abs(difference_value(a, l, b, m, x)));
    }
  }
  return best;
}

double function_change(const RidgeStream& stream, const FeasibleSet& set, AgentIndex i, Round t,
                       bool* exact) {
  check_pair(stream, set, i, t);
  const auto scales = axis_scales(set);
  if (scales.empty()) {
    if (exact) *exact = false;
    return ascent_function_change(stream, set, i, t);
  }
  if (exact) *exact = true;
  const auto a = stream.feature(i, t);
  const auto b = stream.feature(i, t + 1);
  const double l = stream.label(i, t);
  const double m = stream.label(i, t + 1);
  std::vector<Point2> points;
  points.reserve(static_cast<std::size_t>(stream.dim()) * scales.size());
  for (const double s : scales) {
    for (int k = 0; k < stream.dim(); ++k) points.push_back({s * a[k], s * b[k]});
  }
  const auto hull = convex_hull(std::move(points));
  if (hull.size() == 1) return max_abs_on_segment(hull[0], hull[0], l, m);
  double best = 0.0;
  for (std::size_t k = 0; k < hull.size(); ++k) {
    best = std::max(best, max_abs_on_segment(hull[k], hull[(k + 1) % hull.size()], l, m));
  }
  return best;
}

double gradient_change(const RidgeStream& stream, const FeasibleSet& set, AgentIndex i,
                       Round t) {
  check_pair(stream, set, i, t);
  const auto a = stream.feature(i, t);
  const auto b = stream.feature(i, t + 1);
  const double l = stream.label(i, t);
  const double m = stream.label(i, t + 1);
  const auto scales = axis_scales(set);

  double best_sq = 0.0;
  if (!scales.empty()) {
    // At v = s e_k: diff = b beta - a gamma with beta = s b_k - m, gamma = s a_k - l.
    // Written as (b - a) beta + a (beta - gamma) so identical rounds give exactly 0.
    const Vector diff = b - a;
    const double diff_sq = diff.squaredNorm();
    const double cross_term = a.dot(diff);
    const double a_sq = a.squaredNorm();
    for (const double s : scales) {
      for (int k = 0; k < stream.dim(); ++k) {
        const double beta = s * b[k] - m;
        const double shift = s * diff[k] - (m - l);
        const double sq =
            beta * beta * diff_sq + 2.0 * beta * shift * cross_term + shift * shift * a_sq;
        best_sq = std::max(best_sq, sq);
      }
    }
  } else {
    for (const auto& v : set.vertices()) {
      const Vector g = b * (b.dot(v) - m) - a * (a.dot(v) - l);
      best_sq = std::max(best_sq, g.squaredNorm());
    }
  }
  return std::sqrt(std::max(best_sq, 0.0));
}

VariationSeries function_variation(const RidgeStream& stream, const FeasibleSet& set,
                                   int horizon) {
  check_horizon(stream, horizon);
  std::vector<double> per_round(static_cast<std::size_t>(horizon), 0.0);
  std::vector<char> exact_flags(static_cast<std::size_t>(horizon), 1);
  detail::parallel_for(horizon, [&](int k) {
    double best = 0.0;
    bool exact = true;
    for (AgentIndex i = 0; i < stream.agents(); ++i) {
      bool agent_exact = true;
      best = std::max(best, function_change(stream, set, i, k + 1, &agent_exact));
      exact = exact && agent_exact;
    }
    per_round[static_cast<std::size_t>(k)] = best;
    exact_flags[static_cast<std::size_t>(k)] = exact ? 1 : 0;
  });
  const bool exact =
      std::all_of(exact_flags.begin(), exact_flags.end(), [](char f) { return f != 0; });
  return accumulate(std::move(per_round), exact);
}

VariationSeries gradient_variation(const RidgeStream& stream, const FeasibleSet& set,
                                   int horizon) {
  check_horizon(stream, horizon);
  std::vector<double> per_round(static_cast<std::size_t>(horizon), 0.0);
  detail::parallel_for(horizon, [&](int k) {
    double best = 0.0;
    for (AgentIndex i = 0; i < stream.agents(); ++i) {
      best = std::max(best, gradient_change(stream, set, i, k + 1));
    }
    per_round[static_cast<std::size_t>(k)] = best;
  });
  return accumulate(std::move(per_round), true);
}

}  // namespace dofw
