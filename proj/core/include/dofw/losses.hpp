#pragma once

#include <cstdint>
#include <iosfwd>

#include "dofw/feasible_set.hpp"
#include "dofw/types.hpp"

namespace dofw {

/// Network objective of one round, F_t(x) = 1/2 x'Hx - b'x + c.
struct QuadraticObjective {
  Matrix hessian;
  Vector linear;
  double constant = 0.0;

  double value(const Vector& x) const { return 0.5 * x.dot(hessian * x) - linear.dot(x) + constant; }
  Vector gradient(const Vector& x) const { return hessian * x - linear; }
};

/// Online loss oracle: f_{i,t} for agent i in [0, n) at round t in [1, rounds()].
///
/// Every stream in this library is quadratic, so it can also hand out the
/// summed round objective F_t used by the comparator.
class LossStream {
 public:
  virtual ~LossStream() = default;

  virtual int agents() const = 0;
  virtual int dim() const = 0;
  /// Number of rounds with data. Variation budgets over T rounds need T + 1.
  virtual int rounds() const = 0;

  virtual double value(AgentIndex i, Round t, Eigen::Ref<const Vector> x) const = 0;
  virtual void gradient_into(AgentIndex i, Round t, Eigen::Ref<const Vector> x,
                             Eigen::Ref<Vector> out) const = 0;
  virtual QuadraticObjective round_objective(Round t) const = 0;

  Vector gradient(AgentIndex i, Round t, Eigen::Ref<const Vector> x) const {
    Vector g(dim());
    gradient_into(i, t, x, g);
    return g;
  }

  /// F_t(x) = sum_i f_{i,t}(x).
  double network_value(Round t, Eigen::Ref<const Vector> x) const;

 protected:
  void check_index(AgentIndex i, Round t) const;
};

/// Ridge losses f_{i,t}(x) = 1/2 (a_{i,t}'x - l_{i,t})^2 + lambda1 ||x||^2.
///
/// Fully materialized: features are stored column-wise, column (t-1)*n + i.
/// A frozen stream maps every round onto a single stored round.
class RidgeStream final : public LossStream {
 public:
  RidgeStream(int agents, int dim, int rounds, double lambda1, Matrix features, Vector labels);

  int agents() const override { return agents_; }
  int dim() const override { return dim_; }
  int rounds() const override { return frozen_ ? frozen_rounds_ : rounds_; }

  double value(AgentIndex i, Round t, Eigen::Ref<const Vector> x) const override;
  void gradient_into(AgentIndex i, Round t, Eigen::Ref<const Vector> x,
                     Eigen::Ref<Vector> out) const override;
  QuadraticObjective round_objective(Round t) const override;

  double lambda1() const { return lambda1_; }
  bool frozen() const { return frozen_; }
  Eigen::Ref<const Vector> feature(AgentIndex i, Round t) const;
  double label(AgentIndex i, Round t) const;

  /// Copy whose every round equals `base` of this stream, available for `rounds` rounds.
  RidgeStream frozen_at(Round base, int rounds) const;

 private:
  Eigen::Index column(AgentIndex i, Round t) const;

  int agents_;
  int dim_;
  int rounds_;
  double lambda1_;
  Matrix features_;
  Vector labels_;
  bool frozen_ = false;
  int frozen_rounds_ = 0;
};

struct RidgeOptions {
  double lambda1 = 5e-6;
  double feature_bound = 5.0;   // entries uniform in [-bound, bound]
  bool static_features = false; // draw features once and reuse them every round
};

/// Generates T + 1 rounds: features uniform in [-5, 5], labels
/// l = a'x0 + 2 xi / (d sqrt(t)) with x0 = (1/d, ..., 1/d) and xi ~ U[0, 1].
RidgeStream generate_ridge(int agents, int dim, int horizon, std::uint64_t seed,
                           const RidgeOptions& options = {});

/// Time-invariant stream built from round `base` of `source`.
RidgeStream static_stream(const RidgeStream& source, Round base, int rounds);

struct LipschitzConstants {
  double function = 0.0;  // L_X: bound on ||grad f|| over the set
  double gradient = 0.0;  // G_X: Lipschitz constant of grad f
};

/// Exact over the vertex set: the gradient norm is convex in x, so its
/// maximum sits at an extreme point. Throws for sets without a small vertex list.
LipschitzConstants lipschitz_constants(const RidgeStream& stream, const FeasibleSet& set);

/// Rows `i,t,l,a_1..a_d`, one per (agent, round).
void write_ridge_csv(std::ostream& out, const RidgeStream& stream);
RidgeStream read_ridge_csv(std::istream& in, double lambda1);

}  // namespace dofw
