// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "radq/adapter.hpp"
#include "radq/trainer.hpp"

namespace {

radq::LoraLayer make_layer(std::size_t n, std::size_t rank) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  radq::Matrix w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
  auto factors = radq::init_adapters(n, n, rank, 12);
  for (Eigen::Index i = 0; i < factors.b.size(); ++i) factors.b.data()[i] = normal(rng);
  return radq::LoraLayer(radq::quantize_matrix(w), std::move(factors));
}

void BM_LoraForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto layer = make_layer(n, 16);
  const radq::Vector x = radq::Vector::Ones(static_cast<Eigen::Index>(n));
  for (auto _ : state) benchmark::DoNotOptimize(layer.forward(x).data());
}
BENCHMARK(BM_LoraForward)->Arg(128)->Arg(512);

void BM_LoraMerge(benchmark::State& state) {
  const auto layer = make_layer(static_cast<std::size_t>(state.range(0)), 16);
  for (auto _ : state) benchmark::DoNotOptimize(layer.merge().data());
}
BENCHMARK(BM_LoraMerge)->Arg(128)->Arg(512);

void BM_ToyTrainingStep(benchmark::State& state) {
  radq::ToyModelConfig mc;
  mc.hidden = static_cast<std::size_t>(state.range(0));
  auto model = radq::make_toy_model(mc);
  const auto batch = radq::make_copy_task(8, mc.vocab, 1, 3);
  radq::OptimizerState opt({}, {model.layer().a_values().size(), model.layer().b_values().size()});
  for (auto _ : state) {
    const auto g = radq::loss_and_grads(model, batch);
    const radq::TrainableTensor tensors[] = {
        {model.layer().a_values(), {g.grad_a.data(), static_cast<std::size_t>(g.grad_a.size())}},
        {model.layer().b_values(), {g.grad_b.data(), static_cast<std::size_t>(g.grad_b.size())}}};
    radq::optimizer_step(opt, tensors, 1e-3, 0.01);
  }
}
BENCHMARK(BM_ToyTrainingStep)->Arg(16)->Arg(64);

}  // namespace
