// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "radq/textmetrics.hpp"

namespace {

radq::TokenSequence random_sequence(std::mt19937_64& rng, std::size_t len) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < len; ++i) tokens.push_back("w" + std::to_string(rng() % 12));
  return radq::TokenSequence(std::move(tokens));
}

void BM_Bleu4(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto cand = random_sequence(rng, static_cast<std::size_t>(state.range(0)));
  const std::vector<radq::TokenSequence> refs{random_sequence(rng, static_cast<std::size_t>(state.range(0)))};
  for (auto _ : state) benchmark::DoNotOptimize(radq::bleu(cand, refs).score);
}
BENCHMARK(BM_Bleu4)->Arg(16)->Arg(64)->Arg(256);

void BM_RougeL(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto a = random_sequence(rng, static_cast<std::size_t>(state.range(0)));
  const auto b = random_sequence(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(radq::rouge_l(a, b));
}
BENCHMARK(BM_RougeL)->Arg(16)->Arg(64)->Arg(256);

// Up to 50 tokens the exact alignment search runs; longer inputs go greedy.
void BM_Meteor(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto a = random_sequence(rng, static_cast<std::size_t>(state.range(0)));
  const auto b = random_sequence(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(radq::meteor(a, b));
}
BENCHMARK(BM_Meteor)->Arg(16)->Arg(32)->Arg(64)->Arg(256);

void BM_Tokenize(benchmark::State& state) {
  const std::string text =
      "Heart size is normal. No focal consolidation, pleural effusion, or pneumothorax. "
      "Degenerative changes of the thoracic spine.";
  for (auto _ : state) benchmark::DoNotOptimize(radq::tokenize(text).size());
}
BENCHMARK(BM_Tokenize);

}  // namespace
