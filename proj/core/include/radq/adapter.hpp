// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

// Low-rank adapter over a frozen 4-bit base: h = W0 x + A (B x), with
// W0 (d x k) quantized, A (d x r) and B (r x k) trainable in full precision.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "radq/quantize.hpp"

namespace radq {

struct AdapterFactors {
  Matrix a;  // d x r
  Matrix b;  // r x k
};

/// B = 0 exactly; A entries iid N(0, 1/r) from a seeded mt19937_64. r = 0
/// yields empty d x 0 and 0 x k factors.
AdapterFactors init_adapters(std::size_t rows, std::size_t cols, std::size_t rank, std::uint64_t seed);

class LoraLayer {
 public:
  /// Throws ContractError if the factor shapes disagree with the base or
  /// rank exceeds min(d, k).
  LoraLayer(QuantizedMatrix base, AdapterFactors factors, double update_scale = 1.0);

  std::size_t rows() const noexcept { return base_.rows(); }
  std::size_t cols() const noexcept { return base_.cols(); }
  std::size_t rank() const noexcept { return static_cast<std::size_t>(a_.cols()); }

  const QuantizedMatrix& base() const noexcept { return base_; }
  /// dequantize_matrix(base()), computed once.
  const Matrix& base_dense() const noexcept { return base_dense_; }
  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }
  /// Multiplier on A B. Defaults to 1 so the update is exactly A B.
  double update_scale() const noexcept { return scale_; }

  /// Mutable views of the trainable factors, column-major. The shapes are fixed.
  std::span<double> a_values() noexcept { return {a_.data(), static_cast<std::size_t>(a_.size())}; }
  std::span<double> b_values() noexcept { return {b_.data(), static_cast<std::size_t>(b_.size())}; }
  void set_factors(AdapterFactors factors);

  /// Computes B x first; the d x k update is never formed.
  Vector forward(const Vector& x) const;
  /// W0 + A B as a dense matrix.
  Matrix merge() const;
  /// Dense forward through the quantized base alone.
  Vector base_forward(const Vector& x) const;

  /// SHA-256 of the base's XRQ4 encoding.
  std::string base_hash() const;

 private:
  void check_shapes(const Matrix& a, const Matrix& b) const;

  QuantizedMatrix base_;
  Matrix base_dense_;
  Matrix a_;
  Matrix b_;
  double scale_ = 1.0;
};

// ---------------------------------------------------------------- counting

struct AdapterTarget {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct AdapterTargetSpec {
  std::vector<AdapterTarget> targets;
  std::size_t rank = 0;
};

/// Sum over targets of r * (d + k). Throws ContractError on an empty spec or
/// a nonpositive dimension.
std::uint64_t count_trainable(const AdapterTargetSpec& spec);

/// JSON form: {"rank": r, "targets": [{"name": .., "rows": d, "cols": k,
/// "repeat": n (optional, default 1)}, ...]}.
AdapterTargetSpec parse_target_spec(std::string_view json_text);
AdapterTargetSpec load_target_spec(const std::string& path);

// ---------------------------------------------------------------- checkpoints

struct AdapterCheckpoint {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t rank = 0;
  std::uint64_t seed = 0;
  AdapterFactors factors;
};

/// One line of JSON {"format":"radq-adapter","version":1,"rows","cols","rank","seed"}
/// terminated by '\n', then A and B as little-endian float64 in row-major order.
void write_checkpoint(std::ostream& out, const LoraLayer& layer, std::uint64_t seed);
void write_checkpoint(std::ostream& out, const AdapterCheckpoint& ckpt);
AdapterCheckpoint read_checkpoint(std::istream& in);
/// Throws ContractError if the checkpoint dims differ from the layer's.
void apply_checkpoint(LoraLayer& layer, const AdapterCheckpoint& ckpt);

}  // namespace radq
