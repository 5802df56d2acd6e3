// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "radq/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "radq/digest.hpp"
#include "radq/error.hpp"
#include "shuffle.hpp"

namespace radq {

namespace {

double log_sum_exp(const Vector& z) {
  const double mx = z.maxCoeff();
  return mx + std::log((z.array() - mx).exp().sum());
}

Matrix random_matrix(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  }
  return m;
}

}  // namespace

ToyModel::ToyModel(QuantizedMatrix embedding, LoraLayer layer, QuantizedMatrix output)
    : embedding_(std::move(embedding)),
      embedding_dense_(dequantize_matrix(embedding_)),
      layer_(std::move(layer)),
      output_(std::move(output)),
      output_dense_(dequantize_matrix(output_)) {
  const std::size_t h = embedding_.cols();
  if (layer_.rows() != h || layer_.cols() != h) throw ContractError("toy model: adapter layer must be H x H");
  if (output_.rows() != embedding_.rows() || output_.cols() != h) {
    throw ContractError("toy model: output projection must be V x H");
  }
  if (embedding_.rows() == 0 || h == 0) throw ContractError("toy model: empty vocabulary or hidden size");
}

Vector ToyModel::encode(std::span<const int> context) const {
  if (context.empty()) throw InputError("toy model: empty context");
  Vector x = Vector::Zero(static_cast<Eigen::Index>(hidden()));
  for (int t : context) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab()) {
      throw InputError("out-of-vocabulary token " + std::to_string(t));
    }
    x += embedding_dense_.row(t).transpose();
  }
  x /= static_cast<double>(context.size());
  return x;
}

Vector ToyModel::logits(std::span<const int> context) const { return output_dense_ * layer_.forward(encode(context)); }

std::vector<std::string> ToyModel::frozen_hashes() const {
  return {sha256_hex(encode_xrq4(embedding_)), layer_.base_hash(), sha256_hex(encode_xrq4(output_))};
}

ToyModel make_toy_model(const ToyModelConfig& config) {
  if (config.vocab == 0 || config.hidden == 0) throw ContractError("toy model: vocab and hidden must be >= 1");
  std::mt19937_64 rng(config.seed);
  const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  QuantizedMatrix embedding = quantize_matrix(random_matrix(config.vocab, config.hidden, 1.0, rng), config.block_size);
  QuantizedMatrix base = quantize_matrix(random_matrix(config.hidden, config.hidden, inv_sqrt_h, rng), config.block_size);
  QuantizedMatrix output = quantize_matrix(random_matrix(config.vocab, config.hidden, inv_sqrt_h, rng), config.block_size);
  AdapterFactors factors = init_adapters(config.hidden, config.hidden, config.rank, rng());
  return ToyModel(std::move(embedding), LoraLayer(std::move(base), std::move(factors)), std::move(output));
}

std::vector<Example> make_copy_task(std::size_t count, std::size_t vocab, std::size_t context_len,
                                    std::uint64_t seed) {
  if (vocab == 0 || context_len == 0) throw ContractError("copy task: vocab and context length must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Example> out(count);
  for (auto& ex : out) {
    ex.context.resize(context_len);
    for (int& t : ex.context) t = static_cast<int>(detail::bounded(rng, vocab));
    ex.target = ex.context.back();
  }
  return out;
}

GradAccumulator::GradAccumulator(const LoraLayer& layer)
    : grad_a(Matrix::Zero(layer.a().rows(), layer.a().cols())),
      grad_b(Matrix::Zero(layer.b().rows(), layer.b().cols())) {}

void GradAccumulator::reset() {
  grad_a.setZero();
  grad_b.setZero();
  loss_sum = 0.0;
  count = 0;
}

void accumulate_grads(const ToyModel& model, std::span<const Example> batch, GradAccumulator& acc) {
  const LoraLayer& layer = model.layer();
  const double s = layer.update_scale();
  for (const Example& ex : batch) {
    if (ex.target < 0 || static_cast<std::size_t>(ex.target) >= model.vocab()) {
      throw InputError("out-of-vocabulary token " + std::to_string(ex.target));
    }
    const Vector x = model.encode(ex.context);
    const Vector u = layer.b() * x;
    const Vector h = layer.forward(x);
    const Vector z = model.output_dense() * h;
    const double lse = log_sum_exp(z);
    acc.loss_sum += lse - z(ex.target);

    Vector dz = (z.array() - lse).exp().matrix();
    dz(ex.target) -= 1.0;
    const Vector dh = model.output_dense().transpose() * dz;
    if (layer.rank() > 0) {
      acc.grad_a.noalias() += s * dh * u.transpose();
      const Vector du = s * (layer.a().transpose() * dh);
      acc.grad_b.noalias() += du * x.transpose();
    }
    ++acc.count;
  }
}

LossAndGrads loss_and_grads(const ToyModel& model, std::span<const Example> batch) {
  if (batch.empty()) throw ContractError("loss_and_grads: empty batch");
  GradAccumulator acc(model.layer());
  accumulate_grads(model, batch, acc);
  const auto n = static_cast<double>(acc.count);
  return {acc.loss_sum / n, acc.grad_a / n, acc.grad_b / n};
}

double mean_loss(const ToyModel& model, std::span<const Example> batch) {
  if (batch.empty()) throw ContractError("mean_loss: empty batch");
  double sum = 0.0;
  for (const Example& ex : batch) {
    if (ex.target < 0 || static_cast<std::size_t>(ex.target) >= model.vocab()) {
      throw InputError("out-of-vocabulary token " + std::to_string(ex.target));
    }
    const Vector z = model.logits(ex.context);
    sum += log_sum_exp(z) - z(ex.target);
  }
  return sum / static_cast<double>(batch.size());
}

void TrainConfig::validate() const {
  if (batch_size == 0 || grad_accum_steps == 0) throw ContractError("train config: batch sizes must be >= 1");
  if (epochs == 0) throw ContractError("train config: epochs must be >= 1");
  if (!(lr_max >= 0.0) || !std::isfinite(lr_max)) throw ContractError("train config: lr_max must be finite and >= 0");
  if (!(weight_decay >= 0.0)) throw ContractError("train config: weight_decay must be >= 0");
}

std::uint64_t steps_per_epoch(std::size_t train_size, const TrainConfig& config) {
  const std::size_t eb = config.effective_batch();
  return train_size / eb + (train_size % eb != 0 ? 1 : 0);
}

TrainReport train(ToyModel& model, std::span<const Example> train_set, std::span<const Example> val_set,
                  const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw ContractError("train: empty training set");
  if (val_set.empty()) throw ContractError("train: empty validation set");
  const auto started = std::chrono::steady_clock::now();

  TrainReport report;
  report.frozen_hashes_before = model.frozen_hashes();
  report.initial_train_loss = mean_loss(model, train_set);
  report.val_losses.push_back(mean_loss(model, val_set));
  report.best_val_loss = report.val_losses.front();
  report.best_epoch = 0;
  AdapterFactors best{model.layer().a(), model.layer().b()};

  const std::uint64_t spe = steps_per_epoch(train_set.size(), config);
  report.total_steps = spe * config.epochs;

  LoraLayer& layer = model.layer();
  OptimizerState opt(config.optimizer, {layer.a_values().size(), layer.b_values().size()});
  GradAccumulator acc(layer);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Example> micro;
  std::size_t bad_evals = 0;
  std::uint64_t global_step = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) detail::shuffle(std::span<std::size_t>(order), rng);
    for (std::uint64_t s = 0; s < spe; ++s) {
      const std::size_t begin = s * config.effective_batch();
      const std::size_t end = std::min(order.size(), begin + config.effective_batch());
      acc.reset();
      for (std::size_t mb = begin; mb < end; mb += config.batch_size) {
        micro.clear();
        for (std::size_t i = mb; i < std::min(end, mb + config.batch_size); ++i) micro.push_back(train_set[order[i]]);
        accumulate_grads(model, micro, acc);
      }
      const auto n = static_cast<double>(acc.count);
      const Matrix grad_a = acc.grad_a / n;
      const Matrix grad_b = acc.grad_b / n;
      ++global_step;
      const double lr = lr_at(global_step, config.warmup_steps, report.total_steps, config.lr_max);
      // Eigen matrices are column-major, as are the layer's value spans.
      const TrainableTensor tensors[] = {
          {layer.a_values(), {grad_a.data(), static_cast<std::size_t>(grad_a.size())}},
          {layer.b_values(), {grad_b.data(), static_cast<std::size_t>(grad_b.size())}},
      };
      optimizer_step(opt, tensors, lr, config.weight_decay);
      const double step_loss = acc.loss_sum / n;
      if (!std::isfinite(step_loss)) throw NumericalError("divergent step");
      report.step_losses.push_back(step_loss);
      report.lr_trace.push_back(lr);
    }
    report.steps_run = global_step;
    report.epochs_run = epoch;

    const double val = mean_loss(model, val_set);
    if (!std::isfinite(val)) throw NumericalError("divergent step");
    report.val_losses.push_back(val);
    if (val < report.best_val_loss) {
      report.best_val_loss = val;
      report.best_epoch = epoch;
      best = AdapterFactors{layer.a(), layer.b()};
      bad_evals = 0;
    } else if (++bad_evals > config.early_stop_patience) {
      report.stopped_early = epoch < config.epochs;
      break;
    }
  }

  layer.set_factors(std::move(best));
  report.final_train_loss = mean_loss(model, train_set);
  report.frozen_hashes_after = model.frozen_hashes();
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::string to_json(const TrainReport& report, int indent, bool include_wall_time) {
  nlohmann::ordered_json doc;
  doc["step_losses"] = report.step_losses;
  doc["lr_trace"] = report.lr_trace;
  doc["val_losses"] = report.val_losses;
  doc["best_epoch"] = report.best_epoch;
  doc["best_val_loss"] = report.best_val_loss;
  doc["stopped_early"] = report.stopped_early;
  doc["epochs_run"] = report.epochs_run;
  doc["total_steps"] = report.total_steps;
  doc["steps_run"] = report.steps_run;
  doc["initial_train_loss"] = report.initial_train_loss;
  doc["final_train_loss"] = report.final_train_loss;
  doc["frozen_hashes_before"] = report.frozen_hashes_before;
  doc["frozen_hashes_after"] = report.frozen_hashes_after;
  if (include_wall_time) doc["wall_time_seconds"] = report.wall_time_seconds;
  return doc.dump(indent);
}

}  // namespace radq
