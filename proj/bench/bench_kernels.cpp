#include <benchmark/benchmark.h>

#include <random>

#include "rankreg/kernels.hpp"
#include "rankreg/panel.hpp"

using namespace rankreg;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

constexpr std::size_t kFeatures = 25;

template <kernels::Exec E>
void BM_predict_rows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto X = normals(n * kFeatures, 1), p = normals(kFeatures, 2);
  std::vector<double> out(n);
  for (auto _ : state) {
    kernels::predict_rows(E, X, kFeatures, p, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <kernels::Exec E>
void BM_transpose_times(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto X = normals(n * kFeatures, 1), r = normals(n, 2);
  std::vector<double> out(kFeatures);
  for (auto _ : state) {
    kernels::transpose_times(E, X, kFeatures, r, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <kernels::Exec E>
void BM_batch_sse(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<QuarterBatch> batches(10);
  for (std::size_t l = 0; l < batches.size(); ++l) {
    auto& b = batches[l];
    b.n_features = kFeatures;
    b.X = normals(n * kFeatures, 10 + l);
    b.y = normals(n, 100 + l);
    b.company_indices.resize(n);
  }
  const auto p = normals(kFeatures, 3);
  std::vector<double> out(batches.size());
  for (auto _ : state) {
    kernels::batch_sse(E, batches, p, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <kernels::Exec E>
void BM_dominance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto risk = normals(n, 4);
  for (auto& r : risk) r = std::abs(r);
  const auto expected = normals(n, 5);
  std::vector<std::uint32_t> count;
  std::vector<std::vector<std::uint32_t>> dom;
  for (auto _ : state) {
    kernels::dominance(E, risk, expected, count, dom);
    benchmark::DoNotOptimize(count.data());
  }
}

}  // namespace

BENCHMARK(BM_predict_rows<kernels::Exec::Serial>)->Arg(200)->Arg(5000);
BENCHMARK(BM_predict_rows<kernels::Exec::Parallel>)->Arg(200)->Arg(5000);
BENCHMARK(BM_transpose_times<kernels::Exec::Serial>)->Arg(200)->Arg(5000);
BENCHMARK(BM_transpose_times<kernels::Exec::Parallel>)->Arg(200)->Arg(5000);
BENCHMARK(BM_batch_sse<kernels::Exec::Serial>)->Arg(200)->Arg(2000);
BENCHMARK(BM_batch_sse<kernels::Exec::Parallel>)->Arg(200)->Arg(2000);
BENCHMARK(BM_dominance<kernels::Exec::Serial>)->Arg(200)->Arg(1000);
BENCHMARK(BM_dominance<kernels::Exec::Parallel>)->Arg(200)->Arg(1000);

BENCHMARK_MAIN();
