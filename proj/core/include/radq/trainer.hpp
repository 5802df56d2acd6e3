// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

// Desk-scale supervised fine-tuning of a low-rank adapter.
//
// The toy next-token model is
//
//   x      = mean of E[t] over the context tokens t     (E: V x H, frozen, 4-bit)
//   h      = W0 x + A (B x)                             (LoraLayer, H x H)
//   logits = W_out h                                    (W_out: V x H, frozen, 4-bit)
//
// trained with mean cross-entropy. Only A and B receive gradients.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radq/adapter.hpp"
#include "radq/quantize.hpp"

namespace radq {

struct Example {
  std::vector<int> context;
  int target = 0;
};

class ToyModel {
 public:
  /// embedding: V x H, output: V x H, layer: H x H.
  ToyModel(QuantizedMatrix embedding, LoraLayer layer, QuantizedMatrix output);

  std::size_t vocab() const noexcept { return embedding_.rows(); }
  std::size_t hidden() const noexcept { return embedding_.cols(); }

  const LoraLayer& layer() const noexcept { return layer_; }
  LoraLayer& layer() noexcept { return layer_; }
  const Matrix& embedding_dense() const noexcept { return embedding_dense_; }
  const Matrix& output_dense() const noexcept { return output_dense_; }

  /// Context representation x; throws InputError on out-of-vocabulary tokens.
  Vector encode(std::span<const int> context) const;
  Vector logits(std::span<const int> context) const;

  /// SHA-256 of each frozen tensor: embedding, adapter base, output projection.
  std::vector<std::string> frozen_hashes() const;

 private:
  QuantizedMatrix embedding_;
  Matrix embedding_dense_;
  LoraLayer layer_;
  QuantizedMatrix output_;
  Matrix output_dense_;
};

struct ToyModelConfig {
  std::size_t vocab = 8;
  std::size_t hidden = 16;
  std::size_t rank = 8;
  std::size_t block_size = kDefaultBlockSize;
  std::uint64_t seed = 0;
};

/// Frozen tensors drawn N(0, 1) (embedding) and N(0, 1/H) (base, output),
/// quantized to 4 bits; adapters from init_adapters.
ToyModel make_toy_model(const ToyModelConfig& config);

/// Copy task: uniform random context tokens, target = last context token.
std::vector<Example> make_copy_task(std::size_t count, std::size_t vocab, std::size_t context_len,
                                    std::uint64_t seed);

// ---------------------------------------------------------------- gradients

/// Running sums of per-example loss and gradients. Examples are added in
/// order, so any partition of a batch into consecutive micro-batches yields
/// bitwise-identical sums.
struct GradAccumulator {
  Matrix grad_a;
  Matrix grad_b;
  double loss_sum = 0.0;
  std::size_t count = 0;

  explicit GradAccumulator(const LoraLayer& layer);
  void reset();
};

void accumulate_grads(const ToyModel& model, std::span<const Example> batch, GradAccumulator& acc);

struct LossAndGrads {
  double loss = 0.0;
  Matrix grad_a;
  Matrix grad_b;
};

/// Mean cross-entropy and its gradients with respect to A and B.
LossAndGrads loss_and_grads(const ToyModel& model, std::span<const Example> batch);

/// Mean cross-entropy without gradients.
double mean_loss(const ToyModel& model, std::span<const Example> batch);

// ---------------------------------------------------------------- optimizer

struct OptimizerConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool eight_bit_state = false;
  std::size_t state_block_size = kDefaultBlockSize;
};

struct TrainableTensor {
  std::span<double> value;
  std::span<const double> grad;
};

/// AdamW moments per trainable tensor. In 8-bit mode the first moment is
/// stored with nearest rounding and the second moment as sqrt(v) rounded up,
/// so a dequantized denominator never underestimates.
class OptimizerState {
 public:
  OptimizerState(OptimizerConfig config, std::vector<std::size_t> tensor_sizes);

  const OptimizerConfig& config() const noexcept { return config_; }
  std::uint64_t step_count() const noexcept { return step_; }
  std::size_t tensor_count() const noexcept { return sizes_.size(); }

  std::vector<double> first_moment(std::size_t tensor) const;
  std::vector<double> second_moment(std::size_t tensor) const;

 private:
  friend void optimizer_step(OptimizerState&, std::span<const TrainableTensor>, double, double);

  OptimizerConfig config_;
  std::vector<std::size_t> sizes_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::vector<QuantizedStateVector> m_q_;
  std::vector<QuantizedStateVector> sqrt_v_q_;
};

/// One AdamW step: decoupled decay p -= lr*wd*p, then the bias-corrected
/// Adam update. Throws NumericalError("divergent step") and leaves every
/// parameter untouched if any gradient is non-finite.
void optimizer_step(OptimizerState& state, std::span<const TrainableTensor> tensors, double lr,
                    double weight_decay);

// ---------------------------------------------------------------- schedule

/// Linear warmup to lr_max over `warmup_steps`, then linear decay to 0 at
/// `total_steps`. Steps are 1-based; throws ContractError outside [1, total].
double lr_at(std::uint64_t step, std::uint64_t warmup_steps, std::uint64_t total_steps, double lr_max);

// ---------------------------------------------------------------- training

struct TrainConfig {
  std::size_t batch_size = 8;
  std::size_t grad_accum_steps = 4;
  std::size_t epochs = 3;
  double lr_max = 2e-6;
  std::uint64_t warmup_steps = 30;
  double weight_decay = 0.01;
  /// Evaluations without improvement tolerated before stopping.
  std::size_t early_stop_patience = 1;
  std::uint64_t seed = 0;
  bool shuffle = true;
  OptimizerConfig optimizer;

  std::size_t effective_batch() const noexcept { return batch_size * grad_accum_steps; }
  void validate() const;
};

struct TrainReport {
  std::vector<double> step_losses;  // mean loss of each optimizer step's examples
  std::vector<double> lr_trace;
  /// Validation loss before training (index 0) and after each epoch.
  std::vector<double> val_losses;
  std::size_t best_epoch = 0;  // 0 means the initial adapters were best
  double best_val_loss = 0.0;
  bool stopped_early = false;
  std::size_t epochs_run = 0;
  std::uint64_t total_steps = 0;
  std::uint64_t steps_run = 0;
  double initial_train_loss = 0.0;
  double final_train_loss = 0.0;
  std::vector<std::string> frozen_hashes_before;
  std::vector<std::string> frozen_hashes_after;
  double wall_time_seconds = 0.0;
};

/// Optimizer steps per epoch: ceil(train size / effective batch).
std::uint64_t steps_per_epoch(std::size_t train_size, const TrainConfig& config);

/// Trains A and B in place. Validation runs before the first step and after
/// every epoch; the adapters with the lowest validation loss are restored at
/// the end. Throws NumericalError on divergence.
TrainReport train(ToyModel& model, std::span<const Example> train_set, std::span<const Example> val_set,
                  const TrainConfig& config);

/// Wall time is left out unless asked for, so reports of identical runs
/// are byte-identical.
std::string to_json(const TrainReport& report, int indent = 2, bool include_wall_time = false);

}  // namespace radq
