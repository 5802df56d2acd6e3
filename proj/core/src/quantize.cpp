// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "radq/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "radq/error.hpp"

namespace radq {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return a / b + (a % b != 0 ? 1 : 0); }

bool float_representable(double v) { return static_cast<double>(static_cast<float>(v)) == v; }

int decode_nibble(std::uint8_t nibble) { return (nibble & 0x8) ? static_cast<int>(nibble) - 16 : nibble; }

std::uint8_t encode_nibble(int code) { return static_cast<std::uint8_t>(code & 0x0F); }

// Rounds to float32, upward in magnitude when `up` so that dividing by the
// stored scale never exceeds the top level.
double storage_scale(double exact, bool to_float, bool up) {
  if (!to_float) return exact;
  float f = static_cast<float>(exact);
  if (up && static_cast<double>(f) < exact) f = std::nextafter(f, std::numeric_limits<float>::infinity());
  return static_cast<double>(f);
}

int round_level(double ratio, int levels, bool up) {
  const double r = up ? std::copysign(std::ceil(std::abs(ratio)), ratio) : std::round(ratio);
  return static_cast<int>(std::clamp(r, -static_cast<double>(levels), static_cast<double>(levels)));
}

}  // namespace

QuantizedMatrix::QuantizedMatrix(std::size_t rows, std::size_t cols, std::size_t block_size,
                                 int scale_width_bytes, std::vector<double> scales,
                                 std::vector<std::uint8_t> packed_codes)
    : rows_(rows),
      cols_(cols),
      block_size_(block_size),
      scale_width_bytes_(scale_width_bytes),
      scales_(std::move(scales)),
      packed_(std::move(packed_codes)) {
  if (block_size_ == 0) throw InputError("quantized matrix: block size must be >= 1");
  if (scale_width_bytes_ != 4 && scale_width_bytes_ != 8) {
    throw InputError("quantized matrix: scale width must be 4 or 8 bytes");
  }
  const std::size_t n = rows_ * cols_;
  if (scales_.size() != ceil_div(n, block_size_)) throw InputError("quantized matrix: wrong scale count");
  if (packed_.size() != ceil_div(n, 2)) throw InputError("quantized matrix: wrong code byte count");
  if (n % 2 == 1 && (packed_.back() >> 4) != 0) {
    throw InputError("quantized matrix: nonzero padding nibble");
  }
  for (std::size_t b = 0; b < scales_.size(); ++b) {
    const double s = scales_[b];
    if (!std::isfinite(s) || s < 0.0) throw InputError("quantized matrix: invalid scale");
    if (scale_width_bytes_ == 4 && !float_representable(s)) {
      throw InputError("quantized matrix: scale not representable at 32 bits");
    }
    const std::size_t end = std::min(n, (b + 1) * block_size_);
    for (std::size_t i = b * block_size_; i < end; ++i) {
      const std::uint8_t nib = (packed_[i / 2] >> ((i % 2) * 4)) & 0x0F;
      if (nib == 0x8) throw InputError("quantized matrix: code -8 is outside [-7, 7]");
      if (s == 0.0 && nib != 0) throw InputError("quantized matrix: zero-scale block with nonzero code");
    }
  }
}

int QuantizedMatrix::code(std::size_t flat) const {
  if (flat >= size()) throw ContractError("quantized matrix: element index out of range");
  return decode_nibble((packed_[flat / 2] >> ((flat % 2) * 4)) & 0x0F);
}

QuantizedMatrix quantize_matrix(const Matrix& weights, std::size_t block_size, int scale_width_bytes) {
  if (block_size == 0) throw ContractError("quantize: block size must be >= 1");
  if (scale_width_bytes != 4 && scale_width_bytes != 8) {
    throw ContractError("quantize: scale width must be 4 or 8 bytes");
  }
  const auto rows = static_cast<std::size_t>(weights.rows());
  const auto cols = static_cast<std::size_t>(weights.cols());
  const std::size_t n = rows * cols;
  auto at = [&](std::size_t flat) {
    return weights(static_cast<Eigen::Index>(flat / cols), static_cast<Eigen::Index>(flat % cols));
  };
  if (!weights.allFinite()) throw InputError("non-finite weight");

  std::vector<double> scales(ceil_div(n, block_size), 0.0);
  std::vector<std::uint8_t> packed(ceil_div(n, 2), 0);
  for (std::size_t b = 0; b < scales.size(); ++b) {
    const std::size_t begin = b * block_size;
    const std::size_t end = std::min(n, begin + block_size);
    double absmax = 0.0;
    for (std::size_t i = begin; i < end; ++i) absmax = std::max(absmax, std::abs(at(i)));
    const double scale = storage_scale(absmax / kWeightLevels, scale_width_bytes == 4, false);
    scales[b] = scale;
    if (scale == 0.0) continue;
    for (std::size_t i = begin; i < end; ++i) {
      const int code = round_level(at(i) / scale, kWeightLevels, false);
      packed[i / 2] |= static_cast<std::uint8_t>(encode_nibble(code) << ((i % 2) * 4));
    }
  }
  return QuantizedMatrix(rows, cols, block_size, scale_width_bytes, std::move(scales), std::move(packed));
}

Matrix dequantize_matrix(const QuantizedMatrix& q) {
  Matrix out(static_cast<Eigen::Index>(q.rows()), static_cast<Eigen::Index>(q.cols()));
  for (std::size_t flat = 0; flat < q.size(); ++flat) {
    out(static_cast<Eigen::Index>(flat / q.cols()), static_cast<Eigen::Index>(flat % q.cols())) =
        q.code(flat) * q.scale(flat / q.block_size());
  }
  return out;
}

double reconstruction_bound(const QuantizedMatrix& q, std::size_t flat) {
  return q.scale(flat / q.block_size()) / 2.0;
}

QuantizedStateVector quantize_state(std::span<const double> values, std::size_t block_size,
                                    StateRounding rounding) {
  if (block_size == 0) throw ContractError("quantize_state: block size must be >= 1");
  const bool up = rounding == StateRounding::up;
  QuantizedStateVector q;
  q.length = values.size();
  q.block_size = block_size;
  q.codes.assign(values.size(), 0);
  q.scales.assign(ceil_div(values.size(), block_size), 0.0);
  for (std::size_t b = 0; b < q.scales.size(); ++b) {
    const std::size_t begin = b * block_size;
    const std::size_t end = std::min(values.size(), begin + block_size);
    double absmax = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      if (!std::isfinite(values[i])) throw InputError("non-finite state value");
      absmax = std::max(absmax, std::abs(values[i]));
    }
    const double scale = storage_scale(absmax / kStateLevels, true, up);
    q.scales[b] = scale;
    if (scale == 0.0) continue;
    for (std::size_t i = begin; i < end; ++i) {
      q.codes[i] = static_cast<std::int8_t>(round_level(values[i] / scale, kStateLevels, up));
    }
  }
  return q;
}

std::vector<double> dequantize_state(const QuantizedStateVector& q) {
  std::vector<double> out(q.length);
  for (std::size_t i = 0; i < q.length; ++i) out[i] = q.codes[i] * q.scales[i / q.block_size];
  return out;
}

MemoryFootprint footprint(std::size_t rows, std::size_t cols, std::size_t block_size,
                          std::optional<std::size_t> adapter_rank, int scale_width_bytes) {
  if (block_size == 0) throw ContractError("footprint: block size must be >= 1");
  if (scale_width_bytes <= 0) throw ContractError("footprint: scale width must be positive");
  const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
  MemoryFootprint f;
  f.weight_bytes = ceil_div(n, 2);
  f.scale_bytes = ceil_div(n, block_size) * static_cast<std::uint64_t>(scale_width_bytes);
  if (adapter_rank) f.adapter_bytes = static_cast<std::uint64_t>(*adapter_rank) * (rows + cols) * 4;
  f.total_bytes = f.weight_bytes + f.scale_bytes + f.adapter_bytes;
  return f;
}

MemoryFootprint footprint(const QuantizedMatrix& q, std::optional<std::size_t> adapter_rank,
                          int scale_width_bytes) {
  return footprint(q.rows(), q.cols(), q.block_size(), adapter_rank, scale_width_bytes);
}

std::uint64_t dense_bytes(std::size_t rows, std::size_t cols, int bits) {
  return ceil_div(static_cast<std::uint64_t>(rows) * cols * static_cast<std::uint64_t>(bits), 8);
}

}  // namespace radq
