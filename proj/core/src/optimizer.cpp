// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "radq/error.hpp"
#include "radq/trainer.hpp"

namespace radq {

OptimizerState::OptimizerState(OptimizerConfig config, std::vector<std::size_t> tensor_sizes)
    : config_(config), sizes_(std::move(tensor_sizes)) {
  if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0) || !(config_.beta2 >= 0.0 && config_.beta2 < 1.0)) {
    throw ContractError("optimizer: betas must lie in [0, 1)");
  }
  if (!(config_.eps > 0.0)) throw ContractError("optimizer: eps must be > 0");
  for (std::size_t n : sizes_) {
    if (config_.eight_bit_state) {
      const std::vector<double> zeros(n, 0.0);
      m_q_.push_back(quantize_state(zeros, config_.state_block_size));
      sqrt_v_q_.push_back(quantize_state(zeros, config_.state_block_size, StateRounding::up));
    } else {
      m_.emplace_back(n, 0.0);
      v_.emplace_back(n, 0.0);
    }
  }
}

std::vector<double> OptimizerState::first_moment(std::size_t tensor) const {
  return config_.eight_bit_state ? dequantize_state(m_q_.at(tensor)) : m_.at(tensor);
}

std::vector<double> OptimizerState::second_moment(std::size_t tensor) const {
  if (!config_.eight_bit_state) return v_.at(tensor);
  std::vector<double> v = dequantize_state(sqrt_v_q_.at(tensor));
  for (double& x : v) x *= x;
  return v;
}

void optimizer_step(OptimizerState& state, std::span<const TrainableTensor> tensors, double lr,
                    double weight_decay) {
  if (tensors.size() != state.tensor_count()) throw ContractError("optimizer: tensor count mismatch");
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    if (tensors[t].value.size() != tensors[t].grad.size() || tensors[t].value.size() != state.sizes_[t]) {
      throw ContractError("optimizer: tensor " + std::to_string(t) + " shape mismatch");
    }
    for (double g : tensors[t].grad) {
      if (!std::isfinite(g)) throw NumericalError("divergent step");
    }
  }
  if (!std::isfinite(lr) || !std::isfinite(weight_decay)) throw NumericalError("divergent step");

  const OptimizerConfig& cfg = state.config_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t k = 0; k < tensors.size(); ++k) {
    std::vector<double> m = state.first_moment(k);
    std::vector<double> v = state.second_moment(k);
    std::span<double> p = tensors[k].value;
    std::span<const double> g = tensors[k].grad;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] -= lr * weight_decay * p[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
    if (cfg.eight_bit_state) {
      for (double& x : v) x = std::sqrt(x);
      state.m_q_[k] = quantize_state(m, cfg.state_block_size);
      state.sqrt_v_q_[k] = quantize_state(v, cfg.state_block_size, StateRounding::up);
    } else {
      state.m_[k] = std::move(m);
      state.v_[k] = std::move(v);
    }
  }
}

double lr_at(std::uint64_t step, std::uint64_t warmup_steps, std::uint64_t total_steps, double lr_max) {
  if (step < 1 || step > total_steps) {
    throw ContractError("lr_at: step " + std::to_string(step) + " outside [1, " + std::to_string(total_steps) + "]");
  }
  if (step <= warmup_steps) return lr_max * static_cast<double>(step) / static_cast<double>(warmup_steps);
  return lr_max * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup_steps);
}

}  // namespace radq
