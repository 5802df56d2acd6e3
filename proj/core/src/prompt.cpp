// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "radq/corpus.hpp"

namespace radq {

const std::string_view kPromptInstruction =
    "Write the findings of a chest X-ray radiology report. The input gives a classifier's "
    "confidence, between 0 and 1, for each of 18 thoracic conditions: first for the frontal "
    "view, then for the lateral view. A view that was not acquired is marked as absent.";

namespace {

constexpr std::string_view kAbsent = "view absent";

void render_view(std::string& out, std::string_view heading, const std::optional<ViewScores>& view) {
  out += heading;
  out += ":\n";
  if (!view) {
    out += kAbsent;
    out += '\n';
    return;
  }
  char buf[32];
  for (std::size_t i = 0; i < kConditionCount; ++i) {
    std::snprintf(buf, sizeof(buf), "%.4f", (*view)[i]);
    out += kConditionLabels[i];
    out += ": ";
    out += buf;
    out += '\n';
  }
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

}  // namespace

PromptMode parse_prompt_mode(std::string_view name) {
  if (name == "train") return PromptMode::train;
  if (name == "infer") return PromptMode::infer;
  throw ContractError("unknown prompt mode '" + std::string(name) + "' (expected train or infer)");
}

PromptRecord render_prompt(const StudyRecord& record, PromptMode mode) {
  PromptRecord p;
  p.instruction = std::string(kPromptInstruction);
  render_view(p.input, "frontal", record.frontal);
  render_view(p.input, "lateral", record.lateral);
  p.input.pop_back();  // no trailing newline
  if (mode == PromptMode::train) p.response = record.report;
  return p;
}

std::string to_alpaca_text(const PromptRecord& prompt) {
  std::string text =
      "Below is an instruction that describes a task, paired with an input that provides further "
      "context. Write a response that appropriately completes the request.\n\n### Instruction:\n";
  text += prompt.instruction;
  text += "\n\n### Input:\n";
  text += prompt.input;
  text += "\n\n### Response:\n";
  text += prompt.response;
  return text;
}

ParsedPromptInput parse_prompt_input(std::string_view input) {
  const auto lines = split_lines(input);
  ParsedPromptInput parsed;
  std::size_t at = 0;
  auto parse_block = [&](std::string_view heading) -> std::optional<ViewScores> {
    if (at >= lines.size() || lines[at].size() != heading.size() + 1 ||
        lines[at].substr(0, heading.size()) != heading || lines[at].back() != ':') {
      throw InputError("prompt input: expected '" + std::string(heading) + ":'");
    }
    ++at;
    if (at < lines.size() && lines[at] == kAbsent) {
      ++at;
      return std::nullopt;
    }
    ViewScores scores{};
    for (std::size_t i = 0; i < kConditionCount; ++i, ++at) {
      if (at >= lines.size()) throw InputError("prompt input: truncated " + std::string(heading) + " block");
      const std::string_view line = lines[at];
      const std::string prefix = std::string(kConditionLabels[i]) + ": ";
      if (line.substr(0, prefix.size()) != prefix) {
        throw InputError("prompt input: expected label '" + std::string(kConditionLabels[i]) + "'");
      }
      const std::string_view num = line.substr(prefix.size());
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), scores[i]);
      if (ec != std::errc() || ptr != num.data() + num.size()) {
        throw InputError("prompt input: bad score on line '" + std::string(line) + "'");
      }
    }
    return scores;
  };
  parsed.frontal = parse_block("frontal");
  parsed.lateral = parse_block("lateral");
  if (at != lines.size()) throw InputError("prompt input: trailing lines");
  return parsed;
}

std::string to_json_line(const PromptRecord& prompt) {
  nlohmann::ordered_json doc;
  doc["instruction"] = prompt.instruction;
  doc["input"] = prompt.input;
  doc["response"] = prompt.response;
  return doc.dump();
}

PromptRecord parse_prompt_line(std::string_view line) {
  try {
    const auto doc = nlohmann::json::parse(line);
    return {doc.at("instruction").get<std::string>(), doc.at("input").get<std::string>(),
            doc.at("response").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("prompt record: ") + e.what());
  }
}

std::size_t export_prompts(std::span<const StudyRecord> records, const SplitAssignment& split,
                           Partition partition, PromptMode mode, std::ostream& out) {
  const auto& wanted = split.ids(partition);
  const std::unordered_set<std::string_view> ids(wanted.begin(), wanted.end());
  std::unordered_set<std::string_view> known;
  for (const auto& r : records) known.insert(r.id);
  for (const auto& id : wanted) {
    if (!known.contains(id)) throw ContractError("split manifest names unknown id '" + id + "'");
  }
  std::size_t written = 0;
  for (const auto& r : records) {
    if (!ids.contains(r.id)) continue;
    out << to_json_line(render_prompt(r, mode)) << '\n';
    ++written;
  }
  if (!out) throw InputError("prompt export: write failed");
  return written;
}

std::size_t export_prompts(std::span<const StudyRecord> records, const SplitAssignment& split,
                           Partition partition, PromptMode mode, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  return export_prompts(records, split, partition, mode, out);
}

}  // namespace radq
