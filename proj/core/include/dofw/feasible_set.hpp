#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "dofw/types.hpp"

namespace dofw {

/// Unit probability simplex {x >= 0, sum(x) = 1}.
struct Simplex {
  int dim;
};

/// {x : ||x||_1 <= radius}.
struct L1Ball {
  int dim;
  double radius;
};

/// Axis-aligned box [lo, hi]^dim.
struct Box {
  int dim;
  double lo;
  double hi;
};

/// Compact convex constraint set. Provides the linear minimization oracle
/// used by the Frank-Wolfe engine and the Euclidean projection used by the
/// gradient-descent baseline. All members are const and thread-safe.
class FeasibleSet {
 public:
  using Kind = std::variant<Simplex, L1Ball, Box>;

  explicit FeasibleSet(Kind kind);

  static FeasibleSet simplex(int dim) { return FeasibleSet(Simplex{dim}); }
  static FeasibleSet l1_ball(int dim, double radius) {
    return FeasibleSet(L1Ball{dim, radius});
  }
  static FeasibleSet box(int dim, double lo, double hi) {
    return FeasibleSet(Box{dim, lo, hi});
  }

  const Kind& kind() const { return kind_; }
  int dim() const;
  std::string name() const;

  /// argmin_{v in set} <v, g>. Returns a vertex; ties go to the lowest index.
  Vector lmo(const Vector& g) const;

  /// Euclidean projection argmin_{p in set} ||p - y||.
  Vector project(const Vector& y) const;

  /// max_{x1, x2 in set} ||x1 - x2||, exact.
  double diameter() const;

  bool contains(const Vector& x, double tol = 1e-10) const;

  /// Size of the worst constraint violation of x; 0 for feasible points.
  double infeasibility(const Vector& x) const;

  /// Extreme points. Throws std::invalid_argument when the count would
  /// exceed `max_count` (boxes have 2^d of them).
  std::vector<Vector> vertices(std::size_t max_count = 1u << 16) const;

  /// A random point of the set (not uniform for the L1 ball).
  Vector sample(std::mt19937_64& rng) const;

 private:
  void check_input(const Vector& v) const;

  Kind kind_;
};

/// Sort-and-threshold projection onto {x >= 0, sum(x) = radius}.
Vector project_onto_simplex(const Vector& y, double radius = 1.0);

}  // namespace dofw
