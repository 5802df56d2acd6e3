// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>

#include "byteio.hpp"
#include "radq/error.hpp"
#include "radq/quantize.hpp"

namespace radq {

namespace {

constexpr char kXrq4Magic[4] = {'X', 'R', 'Q', '4'};
constexpr char kDenseMagic[4] = {'X', 'R', 'D', 'M'};

std::vector<std::uint8_t> slurp(std::istream& in) {
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw InputError("read failed");
  return bytes;
}

void spill(std::ostream& out, const std::vector<std::uint8_t>& bytes) {
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed");
}

bool has_magic(std::span<const std::uint8_t> bytes, const char (&magic)[4]) {
  if (bytes.size() < 4) return false;
  for (int i = 0; i < 4; ++i) {
    if (bytes[static_cast<std::size_t>(i)] != static_cast<std::uint8_t>(magic[i])) return false;
  }
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_xrq4(const QuantizedMatrix& q) {
  if (q.rows() > UINT32_MAX || q.cols() > UINT32_MAX || q.block_size() > UINT32_MAX) {
    throw ContractError("xrq4: dimensions exceed 32 bits");
  }
  detail::ByteWriter w;
  w.put_chars(kXrq4Magic, 4);
  w.put<std::uint16_t>(kXrq4Version);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(q.rows()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(q.cols()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(q.block_size()));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(q.scale_width_bytes()));
  for (double s : q.scales()) {
    if (q.scale_width_bytes() == 4) {
      w.put_f32(static_cast<float>(s));
    } else {
      w.put_f64(s);
    }
  }
  w.put_bytes(q.packed_codes());
  return std::move(w.bytes());
}

void write_xrq4(std::ostream& out, const QuantizedMatrix& q) { spill(out, encode_xrq4(q)); }

QuantizedMatrix decode_xrq4(std::span<const std::uint8_t> bytes) {
  if (!has_magic(bytes, kXrq4Magic)) throw InputError("xrq4: bad magic");
  detail::ByteReader r(bytes.subspan(4), "xrq4");
  const auto version = r.get<std::uint16_t>();
  if (version != kXrq4Version) throw InputError("xrq4: unsupported version " + std::to_string(version));
  const std::size_t rows = r.get<std::uint32_t>();
  const std::size_t cols = r.get<std::uint32_t>();
  const std::size_t block = r.get<std::uint32_t>();
  const int width = r.get<std::uint8_t>();
  if (block == 0) throw InputError("xrq4: block size must be >= 1");
  if (width != 4 && width != 8) throw InputError("xrq4: scale width must be 4 or 8");
  const std::size_t n = rows * cols;
  const std::size_t blocks = n / block + (n % block != 0 ? 1 : 0);
  if (r.remaining() < blocks * static_cast<std::size_t>(width)) throw InputError("xrq4: truncated data");
  std::vector<double> scales(blocks);
  for (auto& s : scales) s = width == 4 ? static_cast<double>(r.get_f32()) : r.get_f64();
  const auto codes = r.get_bytes(n / 2 + n % 2);
  if (r.remaining() != 0) throw InputError("xrq4: trailing bytes");
  return QuantizedMatrix(rows, cols, block, width, std::move(scales),
                         std::vector<std::uint8_t>(codes.begin(), codes.end()));
}

QuantizedMatrix read_xrq4(std::istream& in) { return decode_xrq4(slurp(in)); }

Matrix read_dense_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      if (b == std::string::npos) throw InputError("csv line " + std::to_string(line_no) + ": empty field");
      double v = 0.0;
      const char* first = field.data() + b;
      const char* last = field.data() + e + 1;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw InputError("csv line " + std::to_string(line_no) + ": not a number");
      }
      row.push_back(v);
    }
    if (line.back() == ',') throw InputError("csv line " + std::to_string(line_no) + ": empty field");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError("csv line " + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_dense_binary(std::ostream& out, const Matrix& m) {
  detail::ByteWriter w;
  w.put_chars(kDenseMagic, 4);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.put_f64(m(i, j));
  }
  spill(out, w.bytes());
}

namespace {

Matrix decode_dense(std::span<const std::uint8_t> bytes) {
  if (!has_magic(bytes, kDenseMagic)) throw InputError("dense matrix: bad magic");
  detail::ByteReader r(bytes.subspan(4), "dense matrix");
  const std::size_t rows = r.get<std::uint32_t>();
  const std::size_t cols = r.get<std::uint32_t>();
  if (r.remaining() != rows * cols * 8) throw InputError("dense matrix: payload size mismatch");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.get_f64();
  }
  return m;
}

}  // namespace

Matrix read_dense_binary(std::istream& in) { return decode_dense(slurp(in)); }

Matrix read_dense_matrix(std::istream& in) {
  const auto bytes = slurp(in);
  if (has_magic(bytes, kDenseMagic)) return decode_dense(bytes);
  std::string text(bytes.begin(), bytes.end());
  std::istringstream csv(text);
  return read_dense_csv(csv);
}

}  // namespace radq
