// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

// Report-level text similarity metrics: BLEU-N with clipped n-gram
// precision, ROUGE-L over the longest common subsequence, and METEOR with
// exact unigram alignment and a fragmentation penalty. All functions are
// pure and safe to call concurrently.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace radq {

/// Ordered lowercase word tokens. No token is empty or contains whitespace.
class TokenSequence {
 public:
  TokenSequence() = default;
  /// Throws ContractError if any token is empty or contains whitespace.
  explicit TokenSequence(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  std::vector<std::string> tokens_;
};

/// Lowercases ASCII, isolates every punctuation character as its own token
/// and splits on whitespace. "XXXX" de-identification markers become "xxxx".
TokenSequence tokenize(std::string_view text);

// ---------------------------------------------------------------- BLEU

enum class BleuSmoothing {
  none,     // any zero precision makes the score 0
  epsilon,  // zero precisions are replaced by kBleuEpsilon
};

inline constexpr double kBleuEpsilon = 1e-9;

struct BleuParams {
  int max_n = 4;
  /// Per-order weights w_n. Empty means uniform 1/max_n.
  std::vector<double> weights;
  BleuSmoothing smoothing = BleuSmoothing::none;

  static BleuParams up_to(int n, BleuSmoothing smoothing = BleuSmoothing::none);
  /// Resolved weights; throws ContractError unless they are nonnegative,
  /// of length max_n and sum to 1.
  std::vector<double> resolved_weights() const;
};

/// Clipped n-gram counts and lengths. Additive across sentences, which is
/// how corpus-level BLEU pools evidence before the geometric mean.
struct BleuStats {
  std::vector<std::size_t> matches;  // clipped matches per order 1..N
  std::vector<std::size_t> totals;   // candidate n-grams per order 1..N
  std::size_t candidate_len = 0;
  std::size_t reference_len = 0;

  explicit BleuStats(int max_n = 4);
  BleuStats& operator+=(const BleuStats& other);
};

struct BleuResult {
  double score = 0.0;
  double brevity_penalty = 0.0;
  std::vector<double> precisions;
  std::size_t candidate_len = 0;
  std::size_t reference_len = 0;
};

/// Collects clipped counts for one candidate against a reference set. The
/// effective reference length is the reference closest in length to the
/// candidate (ties go to the shorter one).
BleuStats bleu_stats(const TokenSequence& candidate, std::span<const TokenSequence> references,
                     int max_n);

BleuResult bleu_from_stats(const BleuStats& stats, const BleuParams& params);

BleuResult bleu(const TokenSequence& candidate, std::span<const TokenSequence> references,
                const BleuParams& params = {});

// ---------------------------------------------------------------- ROUGE-L

struct RougeParams {
  double beta = 1.0;
};

/// Length of the longest common subsequence (O(|a|*|b|) time, O(min) memory).
std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b);

/// LCS F-measure. Returns 0 if either sequence is empty.
double rouge_l(const TokenSequence& candidate, const TokenSequence& reference,
               const RougeParams& params = {});

// ---------------------------------------------------------------- METEOR

struct MeteorParams {
  double alpha = 0.9;
  double gamma = 0.5;
  double frag_beta = 3.0;

  void validate() const;
};

/// A one-to-one exact-match alignment, as (candidate index, reference index)
/// pairs sorted by candidate index.
struct Alignment {
  std::vector<std::pair<std::size_t, std::size_t>> links;
  std::size_t chunks = 0;
  bool exact = true;  // false when the search fell back to the greedy alignment
};

/// Number of chunks of an alignment whose links are sorted by candidate index.
std::size_t count_chunks(std::span<const std::pair<std::size_t, std::size_t>> links);

/// Sequences up to this length are aligned by exact search; longer ones use
/// greedy longest-run matching.
inline constexpr std::size_t kMeteorExactSearchLimit = 50;

/// Maximum-cardinality exact alignment with the fewest chunks.
Alignment align_unigrams(const TokenSequence& candidate, const TokenSequence& reference);

struct MeteorDetail {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
  bool exact_alignment = true;
};

/// Score from alignment counts. Returns a zero detail when matches == 0.
MeteorDetail meteor_from_counts(std::size_t matches, std::size_t chunks, std::size_t candidate_len,
                                std::size_t reference_len, const MeteorParams& params = {});

MeteorDetail meteor_detail(const TokenSequence& candidate, const TokenSequence& reference,
                           const MeteorParams& params = {});

double meteor(const TokenSequence& candidate, const TokenSequence& reference,
              const MeteorParams& params = {});

// ---------------------------------------------------------------- corpus

enum class Aggregation {
  corpus,         // BLEU from pooled counts; ROUGE-L/METEOR averaged
  sentence_mean,  // every metric averaged over per-pair scores
};

struct EvalParams {
  BleuSmoothing bleu_smoothing = BleuSmoothing::none;
  RougeParams rouge;
  MeteorParams meteor;
  Aggregation aggregation = Aggregation::corpus;
};

struct EvalPair {
  std::string id;
  TokenSequence candidate;
  /// BLEU uses every reference; ROUGE-L and METEOR use the first.
  std::vector<TokenSequence> references;
};

struct PairScores {
  std::string id;
  double bleu[4] = {0, 0, 0, 0};
  double rouge_l = 0.0;
  double meteor = 0.0;
};

struct MetricReport {
  double bleu[4] = {0, 0, 0, 0};  // BLEU-1 .. BLEU-4
  double rouge_l = 0.0;
  double meteor = 0.0;
  std::size_t pair_count = 0;
  std::vector<PairScores> pairs;
};

PairScores score_pair(const EvalPair& pair, const EvalParams& params = {});

/// Throws ContractError("empty corpus") on an empty pair list and when a
/// pair has no references.
MetricReport evaluate_corpus(std::span<const EvalPair> pairs, const EvalParams& params = {});

/// JSON document with bleu1..bleu4, rouge_l, meteor, pair_count and "pairs".
std::string to_json(const MetricReport& report, int indent = 2);

}  // namespace radq
