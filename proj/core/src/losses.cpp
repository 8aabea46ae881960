#include "dofw/losses.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>

#include "dofw/csv.hpp"

namespace dofw {

double LossStream::network_value(Round t, Eigen::Ref<const Vector> x) const {
  double total = 0.0;
  for (AgentIndex i = 0; i < agents(); ++i) total += value(i, t, x);
  return total;
}

void LossStream::check_index(AgentIndex i, Round t) const {
  if (i < 0 || i >= agents()) {
    throw std::out_of_range("loss stream: agent " + std::to_string(i) + " outside [0, " +
                            std::to_string(agents()) + ")");
  }
  if (t < 1 || t > rounds()) {
    throw std::out_of_range("loss stream: round " + std::to_string(t) + " outside [1, " +
                            std::to_string(rounds()) + "]");
  }
}

RidgeStream::RidgeStream(int agents, int dim, int rounds, double lambda1, Matrix features,
                         Vector labels)
    : agents_(agents),
      dim_(dim),
      rounds_(rounds),
      lambda1_(lambda1),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  if (agents < 1 || dim < 1 || rounds < 1) {
    throw std::invalid_argument("ridge stream: n, d and rounds must be >= 1");
  }
  if (!(lambda1 >= 0) || !std::isfinite(lambda1)) {
    throw std::invalid_argument("ridge stream: lambda1 must be finite and >= 0");
  }
  const Eigen::Index columns = static_cast<Eigen::Index>(agents) * rounds;
  if (features_.rows() != dim || features_.cols() != columns || labels_.size() != columns) {
    throw std::invalid_argument("ridge stream: feature/label storage does not match n*rounds");
  }
}

Eigen::Index RidgeStream::column(AgentIndex i, Round t) const {
  check_index(i, t);
  const Round stored = frozen_ ? 1 : t;
  return static_cast<Eigen::Index>(stored - 1) * agents_ + i;
}

Eigen::Ref<const Vector> RidgeStream::feature(AgentIndex i, Round t) const {
  return features_.col(column(i, t));
}

double RidgeStream::label(AgentIndex i, Round t) const { return labels_[column(i, t)]; }

double RidgeStream::value(AgentIndex i, Round t, Eigen::Ref<const Vector> x) const {
  if (x.size() != dim_) throw std::invalid_argument("ridge value: dimension mismatch");
  const auto c = column(i, t);
  const double residual = features_.col(c).dot(x) - labels_[c];
  return 0.5 * residual * residual + lambda1_ * x.squaredNorm();
}

void RidgeStream::gradient_into(AgentIndex i, Round t, Eigen::Ref<const Vector> x,
                                Eigen::Ref<Vector> out) const {
  if (x.size() != dim_ || out.size() != dim_) {
    throw std::invalid_argument("ridge gradient: dimension mismatch");
  }
  const auto c = column(i, t);
  const double residual = features_.col(c).dot(x) - labels_[c];
  out.noalias() = residual * features_.col(c) + (2.0 * lambda1_) * x;
}

QuadraticObjective RidgeStream::round_objective(Round t) const {
  check_index(0, t);
  const Eigen::Index first = column(0, t);
  const auto a = features_.middleCols(first, agents_);
  const auto l = labels_.segment(first, agents_);
  QuadraticObjective f;
  f.hessian = a * a.transpose();
  f.hessian.diagonal().array() += 2.0 * lambda1_ * agents_;
  f.linear = a * l;
  f.constant = 0.5 * l.squaredNorm();
  return f;
}

RidgeStream RidgeStream::frozen_at(Round base, int rounds) const {
  if (rounds < 1) throw std::invalid_argument("static stream: rounds must be >= 1");
  const Eigen::Index first = column(0, base);
  RidgeStream copy(agents_, dim_, 1, lambda1_, features_.middleCols(first, agents_),
                   labels_.segment(first, agents_));
  copy.frozen_ = true;
  copy.frozen_rounds_ = rounds;
  return copy;
}

RidgeStream generate_ridge(int agents, int dim, int horizon, std::uint64_t seed,
                           const RidgeOptions& options) {
  if (agents < 1 || dim < 1 || horizon < 1) {
    throw std::invalid_argument("generate_ridge: n, d, T must be >= 1");
  }
  const int rounds = horizon + 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(-options.feature_bound, options.feature_bound);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Eigen::Index columns = static_cast<Eigen::Index>(agents) * rounds;
  Matrix features(dim, columns);
  Vector labels(columns);
  const Vector x0 = Vector::Constant(dim, 1.0 / dim);
  for (Round t = 1; t <= rounds; ++t) {
    for (AgentIndex i = 0; i < agents; ++i) {
      const Eigen::Index c = static_cast<Eigen::Index>(t - 1) * agents + i;
      if (options.static_features && t > 1) {
        features.col(c) = features.col(i);
      } else {
        for (int k = 0; k < dim; ++k) features(k, c) = entry(rng);
      }
      const double xi = unit(rng);
      labels[c] = features.col(c).dot(x0) + 2.0 * xi / (dim * std::sqrt(double(t)));
    }
  }
  return RidgeStream(agents, dim, rounds, options.lambda1, std::move(features),
                     std::move(labels));
}

RidgeStream static_stream(const RidgeStream& source, Round base, int rounds) {
  return source.frozen_at(base, rounds);
}

LipschitzConstants lipschitz_constants(const RidgeStream& stream, const FeasibleSet& set) {
  if (set.dim() != stream.dim()) {
    throw std::invalid_argument("lipschitz constants: set and stream dimensions differ");
  }
  const double lambda = stream.lambda1();
  const int d = stream.dim();
  // Only simplex and L1 ball have closed-form vertex norms; boxes enumerate.
  std::vector<Vector> box_vertices;
  if (std::holds_alternative<Box>(set.kind())) box_vertices = set.vertices();

  LipschitzConstants out;
  double max_grad_sq = 0.0;
  const int stored = stream.frozen() ? 1 : stream.rounds();
  for (Round t = 1; t <= stored; ++t) {
    for (AgentIndex i = 0; i < stream.agents(); ++i) {
      const auto a = stream.feature(i, t);
      const double l = stream.label(i, t);
      const double a_sq = a.squaredNorm();
      out.gradient = std::max(out.gradient, a_sq + 2.0 * lambda);

      // ||a (a'v - l) + 2 lambda v||^2 at every vertex v.
      auto vertex_norm_sq = [&](int k, double scale) {
        const double residual = scale * a[k] - l;
        return residual * residual * a_sq + 4.0 * lambda * residual * scale * a[k] +
               4.0 * lambda * lambda * scale * scale;
      };
      if (std::holds_alternative<Simplex>(set.kind())) {
        for (int k = 0; k < d; ++k) max_grad_sq = std::max(max_grad_sq, vertex_norm_sq(k, 1.0));
      } else if (const auto* ball = std::get_if<L1Ball>(&set.kind())) {
        for (int k = 0; k < d; ++k) {
          max_grad_sq = std::max(max_grad_sq, vertex_norm_sq(k, ball->radius));
          max_grad_sq = std::max(max_grad_sq, vertex_norm_sq(k, -ball->radius));
        }
      } else {
        for (const auto& v : box_vertices) {
          const Vector g = (a.dot(v) - l) * a + 2.0 * lambda * v;
          max_grad_sq = std::max(max_grad_sq, g.squaredNorm());
        }
      }
    }
  }
  out.function = std::sqrt(max_grad_sq);
  return out;
}

void write_ridge_csv(std::ostream& out, const RidgeStream& stream) {
  std::vector<std::string> header{"i", "t", "l"};
  for (int k = 1; k <= stream.dim(); ++k) header.push_back("a_" + std::to_string(k));
  csv::write_row(out, header);
  for (Round t = 1; t <= stream.rounds(); ++t) {
    for (AgentIndex i = 0; i < stream.agents(); ++i) {
      std::vector<std::string> row{std::to_string(i), std::to_string(t),
                                   csv::format(stream.label(i, t))};
      const auto a = stream.feature(i, t);
      for (int k = 0; k < stream.dim(); ++k) row.push_back(csv::format(a[k]));
      csv::write_row(out, row);
    }
  }
}

RidgeStream read_ridge_csv(std::istream& in, double lambda1) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("ridge csv: empty input");
  const auto header = csv::split_line(line);
  if (header.size() < 4 || header[0] != "i" || header[1] != "t" || header[2] != "l") {
    throw std::invalid_argument("ridge csv: expected header i,t,l,a_1..a_d");
  }
  const int dim = static_cast<int>(header.size()) - 3;

  struct Row {
    long long i, t;
    double label;
    Vector a;
  };
  std::vector<Row> rows;
  long long max_agent = -1, max_round = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_line(line);
    if (static_cast<int>(fields.size()) != dim + 3) {
      throw std::invalid_argument("ridge csv: row has wrong field count");
    }
    Row row{csv::parse_int(fields[0]), csv::parse_int(fields[1]), csv::parse_double(fields[2]),
            Vector(dim)};
    for (int k = 0; k < dim; ++k) row.a[k] = csv::parse_double(fields[3 + k]);
    max_agent = std::max(max_agent, row.i);
    max_round = std::max(max_round, row.t);
    rows.push_back(std::move(row));
  }
  const int agents = static_cast<int>(max_agent + 1);
  const int rounds = static_cast<int>(max_round);
  if (agents < 1 || rounds < 1 ||
      rows.size() != static_cast<std::size_t>(agents) * static_cast<std::size_t>(rounds)) {
    throw std::invalid_argument("ridge csv: rows do not cover every (i, t) exactly once");
  }
  Matrix features(dim, static_cast<Eigen::Index>(agents) * rounds);
  Vector labels = Vector::Constant(features.cols(), std::nan(""));
  for (const auto& row : rows) {
    if (row.i < 0 || row.t < 1) throw std::invalid_argument("ridge csv: bad index");
    const Eigen::Index c = (row.t - 1) * agents + row.i;
    if (!std::isnan(labels[c])) throw std::invalid_argument("ridge csv: duplicate (i, t)");
    features.col(c) = row.a;
    labels[c] = row.label;
  }
  return RidgeStream(agents, dim, rounds, lambda1, std::move(features), std::move(labels));
}

}  // namespace dofw
