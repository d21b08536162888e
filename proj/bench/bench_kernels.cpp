// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare
// scaling; the serial variants ignore it.

#include <random>

#include <benchmark/benchmark.h>

#include "kernlyap/kernels.hpp"

namespace {

using kernlyap::Execution;
using kernlyap::PointSet;
using kernlyap::WendlandKernel;

PointSet cloud(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointSet p(n, 2);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

Execution exec_of(const benchmark::State& state) {
  return state.range(1) ? Execution::parallel : Execution::serial;
}

void BM_NearestSiteCounts(benchmark::State& state) {
  const PointSet sites = cloud(state.range(0), 1);
  const PointSet samples = cloud(100 * state.range(0), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernlyap::kernels::nearest_site_counts(sites, samples, exec_of(state)));
  }
}

void BM_GramMatrix(benchmark::State& state) {
  const WendlandKernel k(2, 3, 0.6);
  const PointSet a = cloud(state.range(0), 3);
  for (auto _ : state) benchmark::DoNotOptimize(kernlyap::kernels::gram_matrix(k, a, a, exec_of(state)));
}

void BM_OrbitalMatrix(benchmark::State& state) {
  const WendlandKernel k(2, 2, 0.2);
  const PointSet q = cloud(state.range(0), 4);
  const PointSet v = cloud(state.range(0), 5);
  for (auto _ : state) benchmark::DoNotOptimize(kernlyap::kernels::orbital_matrix(k, q, v, exec_of(state)));
}

void BM_OrbitalExpansion(benchmark::State& state) {
  const WendlandKernel k(2, 2, 0.2);
  const PointSet q = cloud(state.range(0), 6);
  const PointSet v = cloud(state.range(0), 7);
  const Eigen::VectorXd a = Eigen::VectorXd::Ones(state.range(0));
  const PointSet p(0, 2);
  const PointSet x = cloud(4 * state.range(0), 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernlyap::kernels::orbital_expansion(k, q, v, a, p, Eigen::VectorXd(), x,
                                                                  exec_of(state)));
  }
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {100, 400, 1000})
    for (int par : {0, 1}) b->Args({n, par});
  b->ArgNames({"n", "parallel"});
}

BENCHMARK(BM_NearestSiteCounts)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramMatrix)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OrbitalMatrix)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OrbitalExpansion)->Apply(sizes)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
