#include "dofw/feasible_set.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dofw {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Index of the smallest entry, lowest index on ties.
Eigen::Index argmin_lowest(const Vector& g) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < g.size(); ++k) {
    if (g[k] < g[best]) best = k;
  }
  return best;
}

}  // namespace

FeasibleSet::FeasibleSet(Kind kind) : kind_(std::move(kind)) {
  std::visit(Overloaded{
                 [](const Simplex& s) {
                   if (s.dim < 1) throw std::invalid_argument("simplex: dimension must be >= 1");
                 },
                 [](const L1Ball& b) {
                   if (b.dim < 1) throw std::invalid_argument("l1 ball: dimension must be >= 1");
                   if (!(b.radius > 0) || !std::isfinite(b.radius))
                     throw std::invalid_argument("l1 ball: radius must be positive and finite");
                 },
                 [](const Box& b) {
                   if (b.dim < 1) throw std::invalid_argument("box: dimension must be >= 1");
                   if (!(b.hi > b.lo) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
                     throw std::invalid_argument("box: need finite lo < hi");
                 },
             },
             kind_);
}

int FeasibleSet::dim() const {
  return std::visit([](const auto& s) { return s.dim; }, kind_);
}

std::string FeasibleSet::name() const {
  return std::visit(Overloaded{
                        [](const Simplex& s) { return "simplex(" + std::to_string(s.dim) + ")"; },
                        [](const L1Ball& b) {
                          return "l1_ball(" + std::to_string(b.dim) + ", r=" +
                                 std::to_string(b.radius) + ")";
                        },
                        [](const Box& b) {
                          return "box(" + std::to_string(b.dim) + ", [" + std::to_string(b.lo) +
                                 ", " + std::to_string(b.hi) + "])";
                        },
                    },
                    kind_);
}

void FeasibleSet::check_input(const Vector& v) const {
  if (v.size() != dim()) {
    throw std::invalid_argument("dimension mismatch: set has d=" + std::to_string(dim()) +
                                ", vector has " + std::to_string(v.size()));
  }
  if (!v.allFinite()) throw std::domain_error("non-finite vector passed to feasible set");
}

Vector FeasibleSet::lmo(const Vector& g) const {
  check_input(g);
  const auto d = g.size();
  return std::visit(
      Overloaded{
          [&](const Simplex&) -> Vector {
            Vector v = Vector::Zero(d);
            v[argmin_lowest(g)] = 1.0;
            return v;
          },
          [&](const L1Ball& b) -> Vector {
            // -r * sign(g_k) * e_k at k = argmax |g_k|; a zero gradient maps to -r e_0.
            Eigen::Index k = 0;
            for (Eigen::Index j = 1; j < d; ++j) {
              if (std::abs(g[j]) > std::abs(g[k])) k = j;
            }
            Vector v = Vector::Zero(d);
            v[k] = g[k] < 0 ? b.radius : -b.radius;
            return v;
          },
          [&](const Box& b) -> Vector {
            Vector v(d);
            for (Eigen::Index j = 0; j < d; ++j) v[j] = g[j] < 0 ? b.hi : b.lo;
            return v;
          },
      },
      kind_);
}

Vector project_onto_simplex(const Vector& y, double radius) {
  const auto d = y.size();
  std::vector<double> sorted(y.data(), y.data() + d);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0) theta = candidate;
  }
  return (y.array() - theta).cwiseMax(0.0).matrix();
}

Vector FeasibleSet::project(const Vector& y) const {
  check_input(y);
  return std::visit(Overloaded{
                        [&](const Simplex&) -> Vector { return project_onto_simplex(y); },
                        [&](const L1Ball& b) -> Vector {
                          if (y.lpNorm<1>() <= b.radius) return y;
                          const Vector magnitude =
                              project_onto_simplex(y.cwiseAbs(), b.radius);
                          return magnitude.cwiseProduct(
                              y.unaryExpr([](double v) { return v < 0 ? -1.0 : 1.0; }));
                        },
                        [&](const Box& b) -> Vector {
                          return y.cwiseMax(b.lo).cwiseMin(b.hi);
                        },
                    },
                    kind_);
}

double FeasibleSet::diameter() const {
  return std::visit(Overloaded{
                        [](const Simplex& s) { return s.dim == 1 ? 0.0 : std::sqrt(2.0); },
                        [](const L1Ball& b) { return 2.0 * b.radius; },
                        [](const Box& b) { return (b.hi - b.lo) * std::sqrt(double(b.dim)); },
                    },
                    kind_);
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (x.size() != dim() || !x.allFinite()) return false;
  return std::visit(Overloaded{
                        [&](const Simplex&) {
                          return x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol;
                        },
                        [&](const L1Ball& b) { return x.lpNorm<1>() <= b.radius + tol; },
                        [&](const Box& b) {
                          return x.minCoeff() >= b.lo - tol && x.maxCoeff() <= b.hi + tol;
                        },
                    },
                    kind_);
}

double FeasibleSet::infeasibility(const Vector& x) const {
  if (x.size() != dim()) throw std::invalid_argument("infeasibility: dimension mismatch");
  if (!x.allFinite()) return std::numeric_limits<double>::infinity();
  return std::visit(Overloaded{
                        [&](const Simplex&) {
                          return std::max({0.0, -x.minCoeff(), std::abs(x.sum() - 1.0)});
                        },
                        [&](const L1Ball& b) { return std::max(0.0, x.lpNorm<1>() - b.radius); },
                        [&](const Box& b) {
                          return std::max({0.0, b.lo - x.minCoeff(), x.maxCoeff() - b.hi});
                        },
                    },
                    kind_);
}

std::vector<Vector> FeasibleSet::vertices(std::size_t max_count) const {
  const int d = dim();
  std::vector<Vector> out;
  std::visit(Overloaded{
                 [&](const Simplex&) {
                   for (int k = 0; k < d; ++k) out.push_back(Vector::Unit(d, k));
                 },
                 [&](const L1Ball& b) {
                   for (int k = 0; k < d; ++k) {
                     out.push_back(b.radius * Vector::Unit(d, k));
                     out.push_back(-b.radius * Vector::Unit(d, k));
                   }
                 },
                 [&](const Box& b) {
                   if (d >= 63 || (std::size_t{1} << d) > max_count) {
                     throw std::invalid_argument("box vertex enumeration too large for d=" +
                                                 std::to_string(d));
                   }
                   for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
                     Vector v(d);
                     for (int k = 0; k < d; ++k) v[k] = (mask >> k) & 1u ? b.hi : b.lo;
                     out.push_back(std::move(v));
                   }
                 },
             },
             kind_);
  if (out.size() > max_count) {
    throw std::invalid_argument("vertex enumeration exceeds limit for " + name());
  }
  return out;
}

Vector FeasibleSet::sample(std::mt19937_64& rng) const {
  const int d = dim();
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return std::visit(Overloaded{
                        [&](const Simplex&) -> Vector {
                          Vector x(d);
                          for (int k = 0; k < d; ++k) x[k] = expo(rng);
                          return x / x.sum();
                        },
                        [&](const L1Ball& b) -> Vector {
                          // Dirichlet over d coordinates plus a slack coordinate.
                          Vector w(d + 1);
                          for (int k = 0; k <= d; ++k) w[k] = expo(rng);
                          w /= w.sum();
                          Vector x(d);
                          for (int k = 0; k < d; ++k) {
                            x[k] = b.radius * w[k] * (unit(rng) < 0.5 ? -1.0 : 1.0);
                          }
                          return x;
                        },
                        [&](const Box& b) -> Vector {
                          Vector x(d);
                          for (int k = 0; k < d; ++k) x[k] = b.lo + (b.hi - b.lo) * unit(rng);
                          return x;
                        },
                    },
                    kind_);
}

}  // namespace dofw
