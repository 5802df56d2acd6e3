// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <istream>
#include <iterator>
#include <ostream>
#include <string>

#include <json.hpp>

#include "byteio.hpp"
#include "radq/adapter.hpp"
#include "radq/error.hpp"

namespace radq {

namespace {

constexpr const char* kFormat = "radq-adapter";
constexpr int kVersion = 1;

void put_row_major(detail::ByteWriter& w, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.put_f64(m(i, j));
  }
}

Matrix get_row_major(detail::ByteReader& r, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.get_f64();
  }
  return m;
}

}  // namespace

void write_checkpoint(std::ostream& out, const AdapterCheckpoint& ckpt) {
  const auto& f = ckpt.factors;
  if (f.a.rows() != static_cast<Eigen::Index>(ckpt.rows) || f.a.cols() != static_cast<Eigen::Index>(ckpt.rank) ||
      f.b.rows() != static_cast<Eigen::Index>(ckpt.rank) || f.b.cols() != static_cast<Eigen::Index>(ckpt.cols)) {
    throw ContractError("checkpoint: factor shapes disagree with header");
  }
  nlohmann::ordered_json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["rows"] = ckpt.rows;
  header["cols"] = ckpt.cols;
  header["rank"] = ckpt.rank;
  header["seed"] = ckpt.seed;
  const std::string line = header.dump() + "\n";

  detail::ByteWriter w;
  w.put_chars(line.data(), line.size());
  put_row_major(w, f.a);
  put_row_major(w, f.b);
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw InputError("checkpoint: write failed");
}

void write_checkpoint(std::ostream& out, const LoraLayer& layer, std::uint64_t seed) {
  write_checkpoint(out, AdapterCheckpoint{layer.rows(), layer.cols(), layer.rank(), seed,
                                          AdapterFactors{layer.a(), layer.b()}});
}

AdapterCheckpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("checkpoint: missing header");
  AdapterCheckpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.at("format").get<std::string>() != kFormat) throw InputError("checkpoint: unknown format");
    if (header.at("version").get<int>() != kVersion) throw InputError("checkpoint: unsupported version");
    ckpt.rows = header.at("rows").get<std::size_t>();
    ckpt.cols = header.at("cols").get<std::size_t>();
    ckpt.rank = header.at("rank").get<std::size_t>();
    ckpt.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("checkpoint header: ") + e.what());
  }
  const std::vector<std::uint8_t> payload{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const std::size_t expected = (ckpt.rows * ckpt.rank + ckpt.rank * ckpt.cols) * 8;
  if (payload.size() != expected) {
    throw InputError("checkpoint: payload is " + std::to_string(payload.size()) + " bytes, expected " +
                     std::to_string(expected));
  }
  detail::ByteReader r(payload, "checkpoint");
  ckpt.factors.a = get_row_major(r, ckpt.rows, ckpt.rank);
  ckpt.factors.b = get_row_major(r, ckpt.rank, ckpt.cols);
  return ckpt;
}

void apply_checkpoint(LoraLayer& layer, const AdapterCheckpoint& ckpt) {
  if (ckpt.rows != layer.rows() || ckpt.cols != layer.cols() || ckpt.rank != layer.rank()) {
    throw ContractError("checkpoint dims " + std::to_string(ckpt.rows) + "x" + std::to_string(ckpt.cols) + " r=" +
                        std::to_string(ckpt.rank) + " do not match layer " + std::to_string(layer.rows()) + "x" +
                        std::to_string(layer.cols()) + " r=" + std::to_string(layer.rank()));
  }
  layer.set_factors(ckpt.factors);
}

}  // namespace radq
