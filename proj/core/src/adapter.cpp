// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "radq/adapter.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "radq/digest.hpp"
#include "radq/error.hpp"

namespace radq {

AdapterFactors init_adapters(std::size_t rows, std::size_t cols, std::size_t rank, std::uint64_t seed) {
  if (rank > std::min(rows, cols)) throw ContractError("init_adapters: rank exceeds min(d, k)");
  const auto d = static_cast<Eigen::Index>(rows);
  const auto k = static_cast<Eigen::Index>(cols);
  const auto r = static_cast<Eigen::Index>(rank);
  AdapterFactors f{Matrix::Zero(d, r), Matrix::Zero(r, k)};
  if (rank == 0) return f;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(rank)));
  // Row-major fill so the draw order does not depend on Eigen's storage order.
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) f.a(i, j) = normal(rng);
  }
  return f;
}

LoraLayer::LoraLayer(QuantizedMatrix base, AdapterFactors factors, double update_scale)
    : base_(std::move(base)), base_dense_(dequantize_matrix(base_)), scale_(update_scale) {
  check_shapes(factors.a, factors.b);
  a_ = std::move(factors.a);
  b_ = std::move(factors.b);
  if (!std::isfinite(scale_)) throw ContractError("lora layer: update scale must be finite");
}

void LoraLayer::check_shapes(const Matrix& a, const Matrix& b) const {
  const auto d = static_cast<Eigen::Index>(rows());
  const auto k = static_cast<Eigen::Index>(cols());
  if (a.rows() != d || b.cols() != k || a.cols() != b.rows()) {
    throw ContractError("lora layer: factor shapes do not match base " + std::to_string(d) + "x" +
                        std::to_string(k));
  }
  if (static_cast<std::size_t>(a.cols()) > std::min(rows(), cols())) {
    throw ContractError("lora layer: rank exceeds min(d, k)");
  }
}

void LoraLayer::set_factors(AdapterFactors factors) {
  check_shapes(factors.a, factors.b);
  if (factors.a.cols() != a_.cols()) throw ContractError("lora layer: rank cannot change");
  a_ = std::move(factors.a);
  b_ = std::move(factors.b);
}

Vector LoraLayer::forward(const Vector& x) const {
  if (x.size() != static_cast<Eigen::Index>(cols())) {
    throw ContractError("lora forward: input length " + std::to_string(x.size()) + " != " +
                        std::to_string(cols()));
  }
  Vector h = base_dense_ * x;
  if (rank() == 0) return h;
  const Vector bx = b_ * x;
  if (scale_ == 1.0) {
    h.noalias() += a_ * bx;
  } else {
    h.noalias() += scale_ * (a_ * bx);
  }
  return h;
}

Vector LoraLayer::base_forward(const Vector& x) const {
  if (x.size() != static_cast<Eigen::Index>(cols())) throw ContractError("lora forward: input length mismatch");
  return base_dense_ * x;
}

Matrix LoraLayer::merge() const {
  if (rank() == 0) return base_dense_;
  return base_dense_ + scale_ * (a_ * b_);
}

std::string LoraLayer::base_hash() const { return sha256_hex(encode_xrq4(base_)); }

std::uint64_t count_trainable(const AdapterTargetSpec& spec) {
  if (spec.targets.empty()) throw ContractError("count_trainable: empty target spec");
  std::uint64_t total = 0;
  for (const auto& t : spec.targets) {
    if (t.rows == 0 || t.cols == 0) throw ContractError("count_trainable: target '" + t.name + "' has a zero dimension");
    total += static_cast<std::uint64_t>(spec.rank) * (t.rows + t.cols);
  }
  return total;
}

AdapterTargetSpec parse_target_spec(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("target spec: ") + e.what());
  }
  AdapterTargetSpec spec;
  try {
    const auto rank = doc.at("rank").get<long long>();
    if (rank < 0) throw InputError("target spec: rank must be >= 0");
    spec.rank = static_cast<std::size_t>(rank);
    for (const auto& t : doc.at("targets")) {
      const auto rows = t.at("rows").get<long long>();
      const auto cols = t.at("cols").get<long long>();
      const auto repeat = t.value("repeat", 1LL);
      if (rows <= 0 || cols <= 0 || repeat <= 0) {
        throw InputError("target spec: dims and repeat must be positive");
      }
      for (long long i = 0; i < repeat; ++i) {
        std::string name = t.value("name", std::string("target"));
        if (repeat > 1) name += "." + std::to_string(i);
        spec.targets.push_back({std::move(name), static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("target spec: ") + e.what());
  }
  return spec;
}

AdapterTargetSpec load_target_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open target spec '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_target_spec(ss.str());
}

}  // namespace radq
