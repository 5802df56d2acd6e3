// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

// Blockwise symmetric absmax quantization.
//
// A matrix is flattened row-major and cut into blocks of `block_size`
// elements (the last block may be short). Each block stores one scale,
// absmax / L, and every element stores round(w / scale) clamped to [-L, L],
// with L = 7 for 4-bit weights and L = 127 for 8-bit optimizer state.
// Rounding is half away from zero, so a block's absmax maps to +-L exactly.

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace radq {

inline constexpr int kWeightLevels = 7;
inline constexpr int kStateLevels = 127;
inline constexpr std::size_t kDefaultBlockSize = 64;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1>;

/// Frozen 4-bit weight matrix. Codes are packed two per byte, low nibble
/// first, in row-major element order.
class QuantizedMatrix {
 public:
  QuantizedMatrix() = default;

  /// Validates every structural invariant; throws InputError when violated.
  QuantizedMatrix(std::size_t rows, std::size_t cols, std::size_t block_size,
                  int scale_width_bytes, std::vector<double> scales,
                  std::vector<std::uint8_t> packed_codes);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }
  std::size_t block_size() const noexcept { return block_size_; }
  std::size_t block_count() const noexcept { return scales_.size(); }
  int scale_width_bytes() const noexcept { return scale_width_bytes_; }

  /// Signed level in [-7, 7] of the element at row-major index `flat`.
  int code(std::size_t flat) const;
  double scale(std::size_t block) const { return scales_.at(block); }

  std::span<const double> scales() const noexcept { return scales_; }
  std::span<const std::uint8_t> packed_codes() const noexcept { return packed_; }

  friend bool operator==(const QuantizedMatrix&, const QuantizedMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t block_size_ = kDefaultBlockSize;
  int scale_width_bytes_ = 4;
  std::vector<double> scales_;
  std::vector<std::uint8_t> packed_;
};

/// Quantizes W to 4 bits. When `scale_width_bytes` is 4 every scale is
/// rounded to float32 first, and codes are computed against the stored
/// scale, so the container can hold it losslessly.
/// Throws InputError("non-finite weight") and ContractError on bad parameters.
QuantizedMatrix quantize_matrix(const Matrix& weights, std::size_t block_size = kDefaultBlockSize,
                                int scale_width_bytes = 4);

Matrix dequantize_matrix(const QuantizedMatrix& q);

/// Largest |w - dequant(quant(w))| permitted for element `flat`: half its block's scale.
double reconstruction_bound(const QuantizedMatrix& q, std::size_t flat);

// ---------------------------------------------------------------- 8-bit state

enum class StateRounding {
  nearest,  // half away from zero
  up,       // toward +infinity in magnitude; dequantized |value| never underestimates
};

struct QuantizedStateVector {
  std::size_t length = 0;
  std::size_t block_size = kDefaultBlockSize;
  std::vector<std::int8_t> codes;  // in [-127, 127]
  std::vector<double> scales;      // float32-representable, one per block

  friend bool operator==(const QuantizedStateVector&, const QuantizedStateVector&) = default;
};

QuantizedStateVector quantize_state(std::span<const double> values,
                                    std::size_t block_size = kDefaultBlockSize,
                                    StateRounding rounding = StateRounding::nearest);
std::vector<double> dequantize_state(const QuantizedStateVector& q);

// ---------------------------------------------------------------- accounting

struct MemoryFootprint {
  std::uint64_t weight_bytes = 0;
  std::uint64_t scale_bytes = 0;
  std::uint64_t adapter_bytes = 0;
  std::uint64_t total_bytes = 0;
};

/// Storage of a d x k matrix in 4-bit blocks (ceil(dk/2) code bytes plus one
/// scale per block) and, if `adapter_rank` is given, 32-bit factors
/// A (d x r) and B (r x k).
MemoryFootprint footprint(std::size_t rows, std::size_t cols, std::size_t block_size,
                          std::optional<std::size_t> adapter_rank, int scale_width_bytes = 4);
MemoryFootprint footprint(const QuantizedMatrix& q, std::optional<std::size_t> adapter_rank,
                          int scale_width_bytes = 4);

/// Bytes of the same matrix stored densely at `bits` per element.
std::uint64_t dense_bytes(std::size_t rows, std::size_t cols, int bits = 16);

// ---------------------------------------------------------------- containers

/// XRQ4 container: little-endian header {magic "XRQ4", u16 version, u32 d,
/// u32 k, u32 block_size, u8 scale_width}, then the scales (float32 or
/// float64), then the packed codes.
inline constexpr std::uint16_t kXrq4Version = 1;

void write_xrq4(std::ostream& out, const QuantizedMatrix& q);
std::vector<std::uint8_t> encode_xrq4(const QuantizedMatrix& q);
/// Throws InputError on truncated, trailing or inconsistent data.
QuantizedMatrix read_xrq4(std::istream& in);
QuantizedMatrix decode_xrq4(std::span<const std::uint8_t> bytes);

/// Dense matrix input for the quantize tool. CSV is one row per line with
/// comma-separated reals; the binary form ("XRDM") is a little-endian
/// header {magic, u32 rows, u32 cols} followed by rows*cols float64 in
/// row-major order. `read_dense_matrix` detects the form by the magic.
Matrix read_dense_csv(std::istream& in);
Matrix read_dense_binary(std::istream& in);
void write_dense_binary(std::ostream& out, const Matrix& m);
Matrix read_dense_matrix(std::istream& in);

}  // namespace radq
