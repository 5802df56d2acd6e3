// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

// Study records, the seeded 70/10/20 split, and Alpaca-style prompts built
// from per-view classifier scores.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radq/error.hpp"

namespace radq {

inline constexpr std::size_t kConditionCount = 18;

/// Classifier output order; every prompt lists scores in this order.
inline constexpr std::array<std::string_view, kConditionCount> kConditionLabels = {
    "Atelectasis", "Cardiomegaly", "Consolidation", "Edema",
    "Effusion", "Emphysema", "Enlarged Cardiomediastinum", "Fibrosis",
    "Fracture", "Hernia", "Infiltration", "Lung Lesion",
    "Lung Opacity", "Mass", "Nodule", "Pleural Thickening",
    "Pneumonia", "Pneumothorax",
};

using ViewScores = std::array<double, kConditionCount>;

struct StudyRecord {
  std::string id;
  std::optional<ViewScores> frontal;
  std::optional<ViewScores> lateral;
  std::string report;
};

struct CorpusIssue {
  std::size_t line = 0;
  std::string message;
};

/// Every problem found in a corpus file, with 1-based line numbers.
class CorpusError : public InputError {
 public:
  explicit CorpusError(std::vector<CorpusIssue> issues);
  const std::vector<CorpusIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<CorpusIssue> issues_;
};

struct LoadedCorpus {
  std::vector<StudyRecord> records;
  std::vector<std::string> warnings;
};

/// Parses line-delimited JSON {id, frontal, lateral, report}; a view is an
/// array of 18 scores in [0, 1], or null/absent. Blank lines are skipped.
/// Throws CorpusError listing every malformed or invalid line.
LoadedCorpus parse_corpus(std::istream& in);
LoadedCorpus load_corpus(const std::string& path);

/// One record as a JSON line (no trailing newline).
std::string to_json_line(const StudyRecord& record);

// ---------------------------------------------------------------- split

enum class Partition { train, val, test };

std::string_view to_string(Partition p);
/// Throws ContractError on anything but "train", "val" or "test".
Partition parse_partition(std::string_view name);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// floor(0.7 n), floor(0.1 n), remainder.
SplitCounts split_counts(std::size_t n);

struct SplitAssignment {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  const std::vector<std::string>& ids(Partition p) const;
  std::optional<Partition> partition_of(std::string_view id) const;
};

/// Seeded Fisher-Yates over the record order, then a contiguous cut.
/// Throws ContractError on an empty corpus.
SplitAssignment split(std::span<const StudyRecord> records, std::uint64_t seed);

/// {"seed": .., "train": [ids], "val": [ids], "test": [ids]}
std::string to_json(const SplitAssignment& split, int indent = 2);
SplitAssignment parse_manifest(std::string_view json_text);

// ---------------------------------------------------------------- prompts

enum class PromptMode { train, infer };

/// Throws ContractError on anything but "train" or "infer".
PromptMode parse_prompt_mode(std::string_view name);

/// Versioned so exported prompts are reproducible.
inline constexpr std::string_view kPromptInstructionVersion = "radq-prompt-v1";
extern const std::string_view kPromptInstruction;

struct PromptRecord {
  std::string instruction;
  std::string input;
  std::string response;

  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

/// Input lists a "frontal:" block then a "lateral:" block, one
/// "<label>: <score with 4 decimals>" line per condition, or the single line
/// "view absent". Train mode carries the report as the response; infer
/// mode leaves it empty.
PromptRecord render_prompt(const StudyRecord& record, PromptMode mode);

/// The usual three-section Alpaca text for a rendered prompt.
std::string to_alpaca_text(const PromptRecord& prompt);

struct ParsedPromptInput {
  std::optional<ViewScores> frontal;
  std::optional<ViewScores> lateral;
};

/// Inverse of the input rendering; throws InputError on malformed text.
ParsedPromptInput parse_prompt_input(std::string_view input);

std::string to_json_line(const PromptRecord& prompt);
PromptRecord parse_prompt_line(std::string_view line);

/// Writes one JSON prompt line per record of `partition`, in corpus order.
/// Returns the count written.
std::size_t export_prompts(std::span<const StudyRecord> records, const SplitAssignment& split,
                           Partition partition, PromptMode mode, std::ostream& out);
std::size_t export_prompts(std::span<const StudyRecord> records, const SplitAssignment& split,
                           Partition partition, PromptMode mode, const std::string& path);

}  // namespace radq
