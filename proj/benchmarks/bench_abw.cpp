#include <benchmark/benchmark.h>

#include <random>

#include "abw/abw.hpp"

namespace {

abw::BlockLowerTriangular random_factor(abw::BlockShape shape, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  abw::Matrix m(shape.size(), shape.size());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  return abw::BlockLowerTriangular::project(shape, m);
}

// Args: {T, d}
void shapes(benchmark::internal::Benchmark* b) {
  for (const int d : {1, 2, 4})
    for (const int t : {4, 16, 32}) b->Args({t, d});
}

void BM_AbwDistance(benchmark::State& state) {
  const abw::BlockShape shape(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::mt19937_64 rng(1);
  const auto l = random_factor(shape, rng);
  const auto m = random_factor(shape, rng);
  for (auto _ : state) benchmark::DoNotOptimize(abw::abw_distance(l, m));
}
BENCHMARK(BM_AbwDistance)->Apply(shapes);

void BM_OptimizerSet(benchmark::State& state) {
  const abw::BlockShape shape(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::mt19937_64 rng(2);
  const auto l = random_factor(shape, rng);
  const auto m = random_factor(shape, rng);
  for (auto _ : state) benchmark::DoNotOptimize(abw::optimizer_set(l, m).canonical_member());
}
BENCHMARK(BM_OptimizerSet)->Apply(shapes);

void BM_TangentConeDistance(benchmark::State& state) {
  const abw::BlockShape shape(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::mt19937_64 rng(3);
  // Zero the last column so the stabilizer is nontrivial in the final block.
  abw::Matrix base = random_factor(shape, rng).matrix();
  base.col(shape.size() - 1).setZero();
  const abw::BlockLowerTriangular l = abw::BlockLowerTriangular::project(shape, base);
  const auto m1 = random_factor(shape, rng);
  const auto m2 = random_factor(shape, rng);
  const auto v = abw::log_map(l, m1).tangent.direction();
  const auto w = abw::log_map(l, m2).tangent.direction();
  for (auto _ : state) benchmark::DoNotOptimize(abw::tangent_cone_distance(l, v, w));
}
BENCHMARK(BM_TangentConeDistance)->Apply(shapes);

void BM_BlockCholesky(benchmark::State& state) {
  const abw::BlockShape shape(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  std::mt19937_64 rng(4);
  const auto l = random_factor(shape, rng);
  const abw::Matrix sigma = l.matrix() * l.matrix().transpose();
  for (auto _ : state) benchmark::DoNotOptimize(abw::block_cholesky(sigma, shape));
}
BENCHMARK(BM_BlockCholesky)->Apply(shapes);

}  // namespace

BENCHMARK_MAIN();
