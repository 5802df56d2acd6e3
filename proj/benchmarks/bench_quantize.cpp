// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "radq/quantize.hpp"

namespace {

radq::Matrix random_matrix(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  radq::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

void BM_Quantize(benchmark::State& state) {
  const auto w = random_matrix(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(radq::quantize_matrix(w).block_count());
  state.SetItemsProcessed(state.iterations() * w.size());
}
BENCHMARK(BM_Quantize)->Arg(64)->Arg(256)->Arg(1024);

void BM_Dequantize(benchmark::State& state) {
  const auto q = radq::quantize_matrix(random_matrix(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(radq::dequantize_matrix(q).data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(q.size()));
}
BENCHMARK(BM_Dequantize)->Arg(64)->Arg(256)->Arg(1024);

void BM_Xrq4RoundTrip(benchmark::State& state) {
  const auto q = radq::quantize_matrix(random_matrix(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(radq::decode_xrq4(radq::encode_xrq4(q)).block_count());
}
BENCHMARK(BM_Xrq4RoundTrip)->Arg(256)->Arg(1024);

void BM_QuantizeState(benchmark::State& state) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1e-3);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (double& x : v) x = normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(radq::quantize_state(v).length);
}
BENCHMARK(BM_QuantizeState)->Arg(4096)->Arg(65536);

}  // namespace
