// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>

#include "radq/error.hpp"
#include "radq/textmetrics.hpp"

namespace radq {

namespace {

bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }

}  // namespace

TokenSequence::TokenSequence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (const auto& t : tokens_) {
    if (t.empty()) throw ContractError("token sequence: empty token");
    if (std::any_of(t.begin(), t.end(), is_space)) {
      throw ContractError("token sequence: token contains whitespace: '" + t + "'");
    }
  }
}

TokenSequence tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char raw : text) {
    const auto ch = static_cast<unsigned char>(raw);
    if (std::isspace(ch)) {
      flush();
    } else if (std::ispunct(ch)) {
      flush();
      tokens.emplace_back(1, raw);
    } else {
      current.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  flush();
  return TokenSequence(std::move(tokens));
}

}  // namespace radq
