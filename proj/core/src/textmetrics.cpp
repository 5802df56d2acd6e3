// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "radq/textmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <json.hpp>

#include "radq/error.hpp"

namespace radq {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenSequence& seq, std::size_t n) {
  NgramCounts counts;
  if (seq.size() < n) return counts;
  const auto& toks = seq.tokens();
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  }
  return counts;
}

std::size_t closest_reference_length(std::size_t c, std::span<const TokenSequence> references) {
  std::size_t best = references.front().size();
  for (const auto& ref : references) {
    const std::size_t len = ref.size();
    const auto dist = [c](std::size_t l) { return l > c ? l - c : c - l; };
    if (dist(len) < dist(best) || (dist(len) == dist(best) && len < best)) best = len;
  }
  return best;
}

double brevity_penalty(std::size_t c, std::size_t r) {
  if (c > r) return 1.0;
  if (c == 0) return r == 0 ? 1.0 : 0.0;
  return std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
}

}  // namespace

BleuParams BleuParams::up_to(int n, BleuSmoothing smoothing) {
  BleuParams p;
  p.max_n = n;
  p.smoothing = smoothing;
  return p;
}

std::vector<double> BleuParams::resolved_weights() const {
  if (max_n < 1) throw ContractError("bleu: max_n must be >= 1");
  if (weights.empty()) return std::vector<double>(static_cast<std::size_t>(max_n), 1.0 / max_n);
  if (weights.size() != static_cast<std::size_t>(max_n)) {
    throw ContractError("bleu: weights length must equal max_n");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractError("bleu: weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ContractError("bleu: weights must sum to 1");
  return weights;
}

BleuStats::BleuStats(int max_n)
    : matches(static_cast<std::size_t>(std::max(max_n, 0)), 0),
      totals(static_cast<std::size_t>(std::max(max_n, 0)), 0) {}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (other.matches.size() != matches.size()) throw ContractError("bleu stats: order mismatch");
  for (std::size_t i = 0; i < matches.size(); ++i) {
    matches[i] += other.matches[i];
    totals[i] += other.totals[i];
  }
  candidate_len += other.candidate_len;
  reference_len += other.reference_len;
  return *this;
}

BleuStats bleu_stats(const TokenSequence& candidate, std::span<const TokenSequence> references,
                     int max_n) {
  if (references.empty()) throw ContractError("bleu: at least one reference is required");
  if (max_n < 1) throw ContractError("bleu: max_n must be >= 1");
  BleuStats stats(max_n);
  stats.candidate_len = candidate.size();
  stats.reference_len = closest_reference_length(candidate.size(), references);
  for (int n = 1; n <= max_n; ++n) {
    const auto order = static_cast<std::size_t>(n);
    const NgramCounts cand = count_ngrams(candidate, order);
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, cnt] : count_ngrams(ref, order)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, cnt);
      }
    }
    std::size_t matched = 0;
    for (const auto& [gram, cnt] : cand) {
      const auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(cnt, it->second);
    }
    stats.matches[order - 1] = matched;
    stats.totals[order - 1] = candidate.size() >= order ? candidate.size() - order + 1 : 0;
  }
  return stats;
}

BleuResult bleu_from_stats(const BleuStats& stats, const BleuParams& params) {
  const std::vector<double> weights = params.resolved_weights();
  if (stats.matches.size() < weights.size()) throw ContractError("bleu: stats have too few orders");

  BleuResult result;
  result.candidate_len = stats.candidate_len;
  result.reference_len = stats.reference_len;
  result.brevity_penalty = brevity_penalty(stats.candidate_len, stats.reference_len);

  bool any_zero = false;
  double log_sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double p = stats.totals[i] == 0
                   ? 0.0
                   : static_cast<double>(stats.matches[i]) / static_cast<double>(stats.totals[i]);
    if (p == 0.0 && params.smoothing == BleuSmoothing::epsilon) p = kBleuEpsilon;
    result.precisions.push_back(p);
    if (weights[i] == 0.0) continue;
    if (p == 0.0) {
      any_zero = true;
      continue;
    }
    log_sum += weights[i] * std::log(p);
  }
  result.score = any_zero ? 0.0 : result.brevity_penalty * std::exp(log_sum);
  return result;
}

BleuResult bleu(const TokenSequence& candidate, std::span<const TokenSequence> references,
                const BleuParams& params) {
  return bleu_from_stats(bleu_stats(candidate, references, params.max_n), params);
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  const TokenSequence& outer = a.size() >= b.size() ? a : b;
  const TokenSequence& inner = a.size() >= b.size() ? b : a;
  std::vector<std::size_t> prev(inner.size() + 1, 0);
  std::vector<std::size_t> cur(inner.size() + 1, 0);
  for (std::size_t i = 1; i <= outer.size(); ++i) {
    for (std::size_t j = 1; j <= inner.size(); ++j) {
      cur[j] = outer[i - 1] == inner[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[inner.size()];
}

double rouge_l(const TokenSequence& candidate, const TokenSequence& reference,
               const RougeParams& params) {
  if (!(params.beta > 0.0)) throw ContractError("rouge_l: beta must be > 0");
  if (candidate.empty() || reference.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(candidate.size());
  const double recall = lcs / static_cast<double>(reference.size());
  const double b2 = params.beta * params.beta;
  return (1.0 + b2) * precision * recall / (b2 * precision + recall);
}

void MeteorParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("meteor: alpha must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ContractError("meteor: gamma must lie in [0, 1]");
  if (!(frag_beta > 0.0)) throw ContractError("meteor: fragmentation beta must be > 0");
}

MeteorDetail meteor_from_counts(std::size_t matches, std::size_t chunks, std::size_t candidate_len,
                                std::size_t reference_len, const MeteorParams& params) {
  params.validate();
  MeteorDetail d;
  d.matches = matches;
  d.chunks = chunks;
  if (matches == 0) return d;
  if (matches > candidate_len || matches > reference_len || chunks == 0 || chunks > matches) {
    throw ContractError("meteor: inconsistent alignment counts");
  }
  const auto m = static_cast<double>(matches);
  d.precision = m / static_cast<double>(candidate_len);
  d.recall = m / static_cast<double>(reference_len);
  d.fmean = d.precision * d.recall /
            (params.alpha * d.precision + (1.0 - params.alpha) * d.recall);
  d.penalty = params.gamma * std::pow(static_cast<double>(chunks) / m, params.frag_beta);
  d.score = d.fmean * (1.0 - d.penalty);
  return d;
}

MeteorDetail meteor_detail(const TokenSequence& candidate, const TokenSequence& reference,
                           const MeteorParams& params) {
  const Alignment al = align_unigrams(candidate, reference);
  MeteorDetail d =
      meteor_from_counts(al.links.size(), al.chunks, candidate.size(), reference.size(), params);
  d.exact_alignment = al.exact;
  return d;
}

double meteor(const TokenSequence& candidate, const TokenSequence& reference,
              const MeteorParams& params) {
  return meteor_detail(candidate, reference, params).score;
}

PairScores score_pair(const EvalPair& pair, const EvalParams& params) {
  if (pair.references.empty()) throw ContractError("evaluate: pair '" + pair.id + "' has no reference");
  PairScores s;
  s.id = pair.id;
  const BleuStats stats = bleu_stats(pair.candidate, pair.references, 4);
  for (int n = 1; n <= 4; ++n) {
    s.bleu[n - 1] = bleu_from_stats(stats, BleuParams::up_to(n, params.bleu_smoothing)).score;
  }
  s.rouge_l = rouge_l(pair.candidate, pair.references.front(), params.rouge);
  s.meteor = meteor(pair.candidate, pair.references.front(), params.meteor);
  return s;
}

MetricReport evaluate_corpus(std::span<const EvalPair> pairs, const EvalParams& params) {
  if (pairs.empty()) throw ContractError("empty corpus");
  MetricReport report;
  report.pair_count = pairs.size();
  report.pairs.reserve(pairs.size());

  BleuStats pooled(4);
  double rouge_sum = 0.0;
  double meteor_sum = 0.0;
  double bleu_sum[4] = {0, 0, 0, 0};
  for (const auto& pair : pairs) {
    PairScores s = score_pair(pair, params);
    pooled += bleu_stats(pair.candidate, pair.references, 4);
    rouge_sum += s.rouge_l;
    meteor_sum += s.meteor;
    for (int n = 0; n < 4; ++n) bleu_sum[n] += s.bleu[n];
    report.pairs.push_back(std::move(s));
  }

  const auto count = static_cast<double>(pairs.size());
  report.rouge_l = rouge_sum / count;
  report.meteor = meteor_sum / count;
  for (int n = 1; n <= 4; ++n) {
    report.bleu[n - 1] = params.aggregation == Aggregation::corpus
                             ? bleu_from_stats(pooled, BleuParams::up_to(n, params.bleu_smoothing)).score
                             : bleu_sum[n - 1] / count;
  }
  return report;
}

std::string to_json(const MetricReport& report, int indent) {
  using nlohmann::ordered_json;
  ordered_json doc;
  for (int n = 0; n < 4; ++n) doc["bleu" + std::to_string(n + 1)] = report.bleu[n];
  doc["rouge_l"] = report.rouge_l;
  doc["meteor"] = report.meteor;
  doc["pair_count"] = report.pair_count;
  ordered_json pairs = ordered_json::array();
  for (const auto& p : report.pairs) {
    ordered_json row;
    row["id"] = p.id;
    for (int n = 0; n < 4; ++n) row["bleu" + std::to_string(n + 1)] = p.bleu[n];
    row["rouge_l"] = p.rouge_l;
    row["meteor"] = p.meteor;
    pairs.push_back(std::move(row));
  }
  doc["pairs"] = std::move(pairs);
  return doc.dump(indent);
}

}  // namespace radq
