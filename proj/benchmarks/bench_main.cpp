// Oracle cost (LMO vs Euclidean projection) and full-round cost (DOFW vs
// DOGD) on the ridge stream, at the dimensions used by the timing preset.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dofw/algorithms.hpp"
#include "dofw/feasible_set.hpp"
#include "dofw/losses.hpp"

using namespace dofw;

namespace {

Vector random_vector(int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(d);
  for (int k = 0; k < d; ++k) v[k] = normal(rng);
  return v;
}

FeasibleSet make_set(int kind, int d) {
  switch (kind) {
    case 0: return FeasibleSet::simplex(d);
    case 1: return FeasibleSet::l1_ball(d, 1.0);
    default: return FeasibleSet::box(d, 0.0, 1.0);
  }
}

void BM_Lmo(benchmark::State& state) {
  const auto set = make_set(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Vector g = random_vector(set.dim(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(set.lmo(g));
}

void BM_Projection(benchmark::State& state) {
  const auto set = make_set(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Vector y = random_vector(set.dim(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(set.project(y));
}

void set_args(benchmark::internal::Benchmark* b) {
  b->ArgNames({"set", "d"});
  for (int kind : {0, 1, 2}) {
    for (int d : {8, 160, 1000}) b->Args({kind, d});
  }
}

BENCHMARK(BM_Lmo)->Apply(set_args);
BENCHMARK(BM_Projection)->Apply(set_args);

constexpr int kAgents = 20;
constexpr int kRounds = 256;

template <bool FrankWolfe>
void BM_Round(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto stream = generate_ridge(kAgents, d, kRounds, 7);
  const auto set = FeasibleSet::simplex(d);
  const Matrix mixing = Matrix::Constant(kAgents, kAgents, 1.0 / kAgents);
  const std::vector<Vector> start(kAgents, set.lmo(Vector::Zero(d)));

  auto states = initial_states(start);
  Round t = 1;
  for (auto _ : state) {
    if (t > kRounds) {
      state.PauseTiming();
      states = initial_states(start);
      t = 1;
      state.ResumeTiming();
    }
    if constexpr (FrankWolfe) {
      benchmark::DoNotOptimize(dofw_round(states, mixing, stream, t, 0.05, set));
    } else {
      benchmark::DoNotOptimize(dogd_round(states, mixing, stream, t, 0.05, set));
    }
    ++t;
  }
}

BENCHMARK(BM_Round<true>)->Name("BM_DofwRound")->ArgName("d")->Arg(8)->Arg(160);
BENCHMARK(BM_Round<false>)->Name("BM_DogdRound")->ArgName("d")->Arg(8)->Arg(160);

}  // namespace
BENCHMARK_MAIN();
