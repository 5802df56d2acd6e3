// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "radq/error.hpp"
#include "radq/textmetrics.hpp"
#include "report_fixture.hpp"

namespace radq {
namespace {

TokenSequence seq(std::vector<std::string> t) { return TokenSequence(std::move(t)); }

TEST(Tokenize, SplitsPunctuationAndLowercases) {
  EXPECT_EQ(tokenize("The lungs are clear.").tokens(),
            (std::vector<std::string>{"the", "lungs", "are", "clear", "."}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   \n\t ").empty());
  EXPECT_EQ(tokenize("XXXX are normal").tokens(), (std::vector<std::string>{"xxxx", "are", "normal"}));
  EXPECT_EQ(tokenize("T-spine, (mild)").tokens(),
            (std::vector<std::string>{"t", "-", "spine", ",", "(", "mild", ")"}));
}

TEST(Tokenize, IsDeterministicAndWellFormed) {
  const std::string text = "  No  pneumothorax;\tXXXX effusion...\n";
  EXPECT_EQ(tokenize(text), tokenize(text));
  for (const auto& t : tokenize(text)) {
    EXPECT_FALSE(t.empty());
    EXPECT_EQ(t.find_first_of(" \t\n"), std::string::npos);
  }
}

TEST(TokenSequence, RejectsMalformedTokens) {
  EXPECT_THROW(seq({"ok", ""}), ContractError);
  EXPECT_THROW(seq({"two words"}), ContractError);
}

TEST(Bleu, BrevityPenaltyForShortCandidate) {
  const auto cand = seq({"the", "lungs", "are", "clear"});
  const std::vector<TokenSequence> refs{seq({"the", "lungs", "are", "clear", "and", "normal"})};
  const BleuResult r = bleu(cand, refs);
  for (double p : r.precisions) EXPECT_DOUBLE_EQ(p, 1.0);
  EXPECT_EQ(r.candidate_len, 4u);
  EXPECT_EQ(r.reference_len, 6u);
  EXPECT_NEAR(r.brevity_penalty, std::exp(-0.5), 1e-15);
  EXPECT_NEAR(r.score, 0.6065306597126334, 1e-12);
}

TEST(Bleu, IdentityScoresOne) {
  const auto s = tokenize("There is no focal airspace opacity.");
  const std::vector<TokenSequence> refs{s};
  for (int n = 1; n <= 4; ++n) EXPECT_DOUBLE_EQ(bleu(s, refs, BleuParams::up_to(n)).score, 1.0);
}

TEST(Bleu, ClipsRepeatedTokens) {
  const std::vector<TokenSequence> refs{seq({"the", "lungs"})};
  const BleuResult r = bleu(seq({"the", "the", "the", "the"}), refs, BleuParams::up_to(1));
  EXPECT_DOUBLE_EQ(r.precisions[0], 0.25);
}

TEST(Bleu, ClipCountsMatchOracleOnRandomInputs) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = oracle::random_tokens(rng, rng() % 12, 4);
    std::vector<oracle::Tokens> raw_refs;
    std::vector<TokenSequence> refs;
    for (std::size_t k = 0; k < 1 + rng() % 3; ++k) {
      raw_refs.push_back(oracle::random_tokens(rng, rng() % 12, 4));
      refs.emplace_back(raw_refs.back());
    }
    const BleuStats stats = bleu_stats(TokenSequence(c), refs, 4);
    for (std::size_t n = 1; n <= 4; ++n) {
      EXPECT_EQ(stats.matches[n - 1], oracle::clipped_matches(c, raw_refs, n));
    }
  }
}

TEST(Bleu, ZeroPrecisionWithoutSmoothingIsZero) {
  const std::vector<TokenSequence> refs{seq({"a", "b", "c", "d"})};
  const auto cand = seq({"a", "c", "b", "d"});
  EXPECT_EQ(bleu(cand, refs).score, 0.0);
  BleuParams eps;
  eps.smoothing = BleuSmoothing::epsilon;
  EXPECT_GT(bleu(cand, refs, eps).score, 0.0);
}

TEST(Bleu, CandidateShorterThanOrderScoresZero) {
  const std::vector<TokenSequence> refs{seq({"a", "b", "c"})};
  EXPECT_EQ(bleu(seq({"a", "b", "c"}), refs).score, 0.0);
  EXPECT_DOUBLE_EQ(bleu(seq({"a", "b", "c"}), refs, BleuParams::up_to(3)).score, 1.0);
}

TEST(Bleu, EmptyCandidate) {
  const std::vector<TokenSequence> refs{seq({"a"})};
  const BleuResult r = bleu(TokenSequence{}, refs);
  EXPECT_EQ(r.score, 0.0);
  EXPECT_EQ(r.brevity_penalty, 0.0);
  const std::vector<TokenSequence> empty_ref{TokenSequence{}};
  EXPECT_EQ(bleu(TokenSequence{}, empty_ref).brevity_penalty, 1.0);
}

TEST(Bleu, ClosestReferenceLengthPrefersShorterOnTies) {
  const std::vector<TokenSequence> refs{seq({"a", "b", "c", "d", "e"}), seq({"a", "b", "c"})};
  EXPECT_EQ(bleu(seq({"a", "b", "c", "d"}), refs).reference_len, 3u);
}

TEST(Bleu, RejectsBadParameters) {
  const std::vector<TokenSequence> refs{seq({"a"})};
  EXPECT_THROW(bleu(seq({"a"}), {}), ContractError);
  BleuParams p;
  p.weights = {0.5, 0.5};
  EXPECT_THROW(bleu(seq({"a"}), refs, p), ContractError);
  p.max_n = 2;
  p.weights = {0.7, 0.7};
  EXPECT_THROW(bleu(seq({"a"}), refs, p), ContractError);
  p.max_n = 0;
  p.weights.clear();
  EXPECT_THROW(bleu(seq({"a"}), refs, p), ContractError);
}

TEST(Bleu, PrefixOfReferenceScoresBrevityPenaltyOnly) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    // Distinct tokens so every candidate n-gram occurs in the reference.
    oracle::Tokens ref;
    const std::size_t r = 5 + rng() % 10;
    for (std::size_t i = 0; i < r; ++i) ref.push_back("t" + std::to_string(i));
    const std::size_t c = 4 + rng() % (r - 4);
    const oracle::Tokens cand(ref.begin(), ref.begin() + static_cast<std::ptrdiff_t>(c));
    const std::vector<TokenSequence> refs{TokenSequence(ref)};
    const double expected = c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
    EXPECT_NEAR(bleu(TokenSequence(cand), refs).score, expected, 1e-14);
  }
}

TEST(RougeL, HandExamples) {
  EXPECT_DOUBLE_EQ(rouge_l(seq({"a", "b", "c", "d"}), seq({"a", "c", "b", "d"})), 0.75);
  const auto s = tokenize("The heart is normal in size.");
  EXPECT_DOUBLE_EQ(rouge_l(s, s), 1.0);
  EXPECT_EQ(rouge_l(seq({"a", "b"}), seq({"c", "d"})), 0.0);
  EXPECT_EQ(rouge_l(TokenSequence{}, s), 0.0);
  EXPECT_EQ(rouge_l(s, TokenSequence{}), 0.0);
}

TEST(RougeL, BetaWeighting) {
  // LCS 2: P = 2/2, R = 2/4.
  const auto c = seq({"a", "b"});
  const auto r = seq({"a", "x", "b", "y"});
  const double p = 1.0, rec = 0.5, beta = 2.0;
  const double expected = (1 + beta * beta) * p * rec / (beta * beta * p + rec);
  EXPECT_NEAR(rouge_l(c, r, {beta}), expected, 1e-15);
  EXPECT_THROW(rouge_l(c, r, {0.0}), ContractError);
}

TEST(RougeL, LcsMatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto a = oracle::random_tokens(rng, rng() % 9, 4);
    const auto b = oracle::random_tokens(rng, rng() % 9, 4);
    ASSERT_EQ(lcs_length(TokenSequence(a), TokenSequence(b)), oracle::lcs_brute_force(a, b));
  }
}

TEST(RougeL, SymmetricAtBetaOne) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const TokenSequence a(oracle::random_tokens(rng, rng() % 15, 5));
    const TokenSequence b(oracle::random_tokens(rng, rng() % 15, 5));
    EXPECT_DOUBLE_EQ(rouge_l(a, b), rouge_l(b, a));
  }
}

TEST(Meteor, HandExamples) {
  const auto s = seq({"a", "b", "c", "d"});
  EXPECT_DOUBLE_EQ(meteor(s, s), 0.9921875);
  const MeteorDetail d = meteor_detail(seq({"the", "cat", "sat"}), seq({"the", "cat", "ate"}));
  EXPECT_EQ(d.matches, 2u);
  EXPECT_EQ(d.chunks, 1u);
  EXPECT_NEAR(d.fmean, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(d.penalty, 0.0625);
  EXPECT_NEAR(d.score, 0.625, 1e-15);
  EXPECT_EQ(meteor(seq({"a", "b"}), seq({"c"})), 0.0);
  EXPECT_EQ(meteor(TokenSequence{}, s), 0.0);
}

TEST(Meteor, AlignmentMatchesBruteForce) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 1500; ++trial) {
    const auto c = oracle::random_tokens(rng, rng() % 8, 3);
    const auto r = oracle::random_tokens(rng, rng() % 8, 3);
    const Alignment al = align_unigrams(TokenSequence(c), TokenSequence(r));
    const auto want = oracle::meteor_alignment_brute_force(c, r);
    ASSERT_EQ(al.links.size(), want.matches);
    ASSERT_EQ(al.chunks, want.chunks) << "trial " << trial;
    EXPECT_TRUE(al.exact);
    for (const auto& [i, j] : al.links) EXPECT_EQ(c[i], r[j]);
  }
}

TEST(Meteor, ScoreMatchesFormulaOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = oracle::random_tokens(rng, 1 + rng() % 7, 4);
    const auto r = oracle::random_tokens(rng, 1 + rng() % 7, 4);
    const auto want = oracle::meteor_alignment_brute_force(c, r);
    EXPECT_NEAR(meteor(TokenSequence(c), TokenSequence(r)),
                oracle::meteor_formula(want.matches, want.chunks, c.size(), r.size()), 1e-15);
  }
}

TEST(Meteor, RepeatedTokensDoNotExplodeSearch) {
  const TokenSequence a(std::vector<std::string>(50, "the"));
  const Alignment al = align_unigrams(a, a);
  EXPECT_EQ(al.links.size(), 50u);
  EXPECT_EQ(al.chunks, 1u);
  EXPECT_TRUE(al.exact);
}

TEST(Meteor, LongInputsUseGreedyRuns) {
  std::vector<std::string> toks;
  for (int i = 0; i < 60; ++i) toks.push_back("w" + std::to_string(i % 7));
  const TokenSequence s(toks);
  const Alignment al = align_unigrams(s, s);
  EXPECT_FALSE(al.exact);
  EXPECT_EQ(al.links.size(), 60u);
  EXPECT_EQ(al.chunks, 1u);
}

TEST(Meteor, FragmentationStrictlyLowersScore) {
  for (std::size_t m = 2; m <= 20; ++m) {
    for (std::size_t ch = 1; ch < m; ++ch) {
      EXPECT_GT(meteor_from_counts(m, ch, m + 3, m + 1).score, meteor_from_counts(m, ch + 1, m + 3, m + 1).score);
    }
  }
  // Same matches, different order: one chunk versus four.
  const auto ref = seq({"a", "b", "c", "d"});
  EXPECT_GT(meteor(seq({"a", "b", "c", "d"}), ref), meteor(seq({"d", "c", "b", "a"}), ref));
}

TEST(Meteor, RejectsBadParameters) {
  const auto s = seq({"a"});
  EXPECT_THROW(meteor(s, s, {1.5, 0.5, 3.0}), ContractError);
  EXPECT_THROW(meteor(s, s, {0.9, 2.0, 3.0}), ContractError);
  EXPECT_THROW(meteor(s, s, {0.9, 0.5, 0.0}), ContractError);
}

TEST(Metrics, IdentityAndRangeOnRandomSequences) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const TokenSequence a(oracle::random_tokens(rng, 1 + rng() % 30, 6));
    const TokenSequence b(oracle::random_tokens(rng, rng() % 30, 6));
    const std::vector<TokenSequence> self{a};
    // Sequences shorter than four tokens have no 4-grams; score the orders they have.
    const int order = static_cast<int>(std::min<std::size_t>(4, a.size()));
    EXPECT_DOUBLE_EQ(bleu(a, self, BleuParams::up_to(order)).score, 1.0);
    EXPECT_DOUBLE_EQ(rouge_l(a, a), 1.0);
    EXPECT_NEAR(meteor(a, a), 1.0 - 0.5 * std::pow(1.0 / static_cast<double>(a.size()), 3.0), 1e-15);
    const std::vector<TokenSequence> other{b};
    for (double v : {bleu(a, other).score, rouge_l(a, b), meteor(a, b)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(ReportFixture, ScoresAreStable) {
  // Frozen from an independent script over the same tokenization.
  const auto ref = tokenize(fixtures::kCase1Reference);
  const auto cand = tokenize(fixtures::kCase1Candidate);
  EXPECT_EQ(cand.size(), 31u);
  EXPECT_EQ(ref.size(), 21u);
  EXPECT_NEAR(rouge_l(cand, ref), 16.0 / 26.0, 1e-15);
  const MeteorDetail d = meteor_detail(cand, ref);
  EXPECT_EQ(d.matches, 16u);
  EXPECT_EQ(d.chunks, 6u);
  EXPECT_NEAR(d.score, 0.7080965909090908, 1e-12);
  const std::vector<TokenSequence> refs{ref};
  const BleuResult b = bleu(cand, refs);
  EXPECT_NEAR(b.score, 0.24850685748956688, 1e-12);
}

TEST(EvaluateCorpus, SinglePairEqualsSentenceScores) {
  EvalPair pair{"p1", tokenize("No pleural effusion or pneumothorax is seen."),
                {tokenize("There is no effusion or pneumothorax.")}};
  const MetricReport rep = evaluate_corpus(std::span<const EvalPair>(&pair, 1));
  const PairScores s = score_pair(pair);
  EXPECT_EQ(rep.pair_count, 1u);
  for (int n = 0; n < 4; ++n) EXPECT_DOUBLE_EQ(rep.bleu[n], s.bleu[n]);
  EXPECT_DOUBLE_EQ(rep.rouge_l, s.rouge_l);
  EXPECT_DOUBLE_EQ(rep.meteor, s.meteor);
}

TEST(EvaluateCorpus, IdentityPairs) {
  const auto s = tokenize("The heart size is normal.");
  const std::vector<EvalPair> pairs{{"a", s, {s}}, {"b", s, {s}}};
  const MetricReport rep = evaluate_corpus(pairs);
  for (int n = 0; n < 4; ++n) EXPECT_DOUBLE_EQ(rep.bleu[n], 1.0);
  EXPECT_DOUBLE_EQ(rep.rouge_l, 1.0);
  EXPECT_EQ(rep.pair_count, 2u);
}

TEST(EvaluateCorpus, PoolsCountsNotScores) {
  // Pair one shares no 4-gram; pair two shares all of them.
  const std::vector<EvalPair> pairs{
      {"a", seq({"a", "b", "c", "d"}), {seq({"a", "b", "c", "x"})}},
      {"b", seq({"p", "q", "r", "s", "t"}), {seq({"p", "q", "r", "s", "t"})}},
  };
  const MetricReport pooled = evaluate_corpus(pairs);
  EXPECT_EQ(pooled.pairs[0].bleu[3], 0.0);
  // Pooled by hand: 3/4 + 5/5, 2/3 + 4/4, 1/2 + 3/3, 0/1 + 2/2.
  BleuStats a = bleu_stats(pairs[0].candidate, pairs[0].references, 4);
  a += bleu_stats(pairs[1].candidate, pairs[1].references, 4);
  EXPECT_EQ(a.matches, (std::vector<std::size_t>{8, 6, 4, 2}));
  EXPECT_EQ(a.totals, (std::vector<std::size_t>{9, 7, 5, 3}));
  const double expected = std::exp((std::log(8.0 / 9) + std::log(6.0 / 7) + std::log(4.0 / 5) + std::log(2.0 / 3)) / 4);
  EXPECT_NEAR(pooled.bleu[3], expected, 1e-14);
  EXPECT_GT(pooled.bleu[3], 0.0);

  EvalParams mean;
  mean.aggregation = Aggregation::sentence_mean;
  EXPECT_NEAR(evaluate_corpus(pairs, mean).bleu[3], 0.5, 1e-15);
}

TEST(EvaluateCorpus, Errors) {
  EXPECT_THROW(evaluate_corpus({}), ContractError);
  const std::vector<EvalPair> no_ref{{"a", seq({"x"}), {}}};
  EXPECT_THROW(evaluate_corpus(no_ref), ContractError);
}

TEST(EvaluateCorpus, JsonShape) {
  const auto s = tokenize("Clear lungs.");
  const std::vector<EvalPair> pairs{{"id-1", s, {s}}};
  const std::string json = to_json(evaluate_corpus(pairs));
  for (const char* key : {"\"bleu1\"", "\"bleu4\"", "\"rouge_l\"", "\"meteor\"", "\"pair_count\"", "\"pairs\"", "\"id-1\""}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace radq
