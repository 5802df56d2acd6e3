// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "radq/corpus.hpp"
#include "radq/error.hpp"

namespace radq {
namespace {

const std::string kSampleCorpus = std::string(RADQ_DATA_DIR) + "/fixtures/sample_corpus.jsonl";

ViewScores constant_view(double v) {
  ViewScores s;
  s.fill(v);
  return s;
}

std::vector<StudyRecord> make_records(std::size_t n) {
  std::vector<StudyRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"r" + std::to_string(i), constant_view(0.1), std::nullopt, "ok"});
  return out;
}

std::string record_line(const nlohmann::json& j) { return j.dump() + "\n"; }

nlohmann::json valid_record(const std::string& id) {
  return {{"id", id}, {"frontal", std::vector<double>(18, 0.25)}, {"lateral", nullptr}, {"report", "Clear."}};
}

TEST(Labels, FixedOrder) {
  EXPECT_EQ(kConditionLabels.size(), 18u);
  EXPECT_EQ(kConditionLabels.front(), "Atelectasis");
  EXPECT_EQ(kConditionLabels[6], "Enlarged Cardiomediastinum");
  EXPECT_EQ(kConditionLabels.back(), "Pneumothorax");
}

TEST(LoadCorpus, SampleFixture) {
  const LoadedCorpus c = load_corpus(kSampleCorpus);
  ASSERT_EQ(c.records.size(), 10u);
  EXPECT_TRUE(c.warnings.empty());
  EXPECT_FALSE(c.records[4].frontal.has_value());
  EXPECT_FALSE(c.records[2].lateral.has_value());
  EXPECT_TRUE(c.records[0].frontal.has_value() && c.records[0].lateral.has_value());
}

TEST(LoadCorpus, SingleViewAccepted) {
  std::istringstream in(record_line(valid_record("a")));
  const LoadedCorpus c = parse_corpus(in);
  ASSERT_EQ(c.records.size(), 1u);
  EXPECT_TRUE(c.records[0].frontal.has_value());
  EXPECT_FALSE(c.records[0].lateral.has_value());
}

TEST(LoadCorpus, EmptyFileWarns) {
  std::istringstream in("\n\n");
  const LoadedCorpus c = parse_corpus(in);
  EXPECT_TRUE(c.records.empty());
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_EQ(c.warnings[0], "corpus is empty");
}

TEST(LoadCorpus, OutOfRangeScoreRejected) {
  auto j = valid_record("a");
  j["frontal"][3] = 1.5;
  std::istringstream in(record_line(valid_record("ok")) + record_line(j));
  try {
    parse_corpus(in);
    FAIL();
  } catch (const CorpusError& e) {
    ASSERT_EQ(e.issues().size(), 1u);
    EXPECT_EQ(e.issues()[0].line, 2u);
    EXPECT_NE(e.issues()[0].message.find("score out of range"), std::string::npos);
  }
}

TEST(LoadCorpus, CollectsEveryIssueWithLineNumbers) {
  auto both_missing = valid_record("b");
  both_missing["frontal"] = nullptr;
  std::istringstream in(record_line(valid_record("a")) + "{not json\n" + record_line(both_missing) +
                        record_line(valid_record("a")));
  try {
    parse_corpus(in);
    FAIL();
  } catch (const CorpusError& e) {
    ASSERT_EQ(e.issues().size(), 3u);
    EXPECT_EQ(e.issues()[0].line, 2u);
    EXPECT_EQ(e.issues()[1].line, 3u);
    EXPECT_NE(e.issues()[1].message.find("both views missing"), std::string::npos);
    EXPECT_EQ(e.issues()[2].line, 4u);
  }
}

TEST(LoadCorpus, MissingFileIsInputError) { EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), InputError); }

// Each mutation breaks exactly one stated invariant; the unmutated record passes.
TEST(LoadCorpus, RejectsExactlyTheInvalidMutations) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 400; ++trial) {
    nlohmann::json j = {{"id", "x"}, {"report", "text"}};
    const bool has_frontal = rng() % 2 == 0, has_lateral = !has_frontal || rng() % 2 == 0;
    auto view = [&] {
      std::vector<double> v(18);
      for (double& x : v) x = unit(rng);
      return v;
    };
    if (has_frontal) j["frontal"] = view();
    if (has_lateral) j["lateral"] = view();
    bool valid = true;
    const std::string key = has_frontal ? "frontal" : "lateral";
    switch (rng() % 9) {
      case 0: break;
      case 1: j[key][rng() % 18] = 1.0 + unit(rng) + 1e-9; valid = false; break;
      case 2: j[key][rng() % 18] = -1e-6 - unit(rng); valid = false; break;
      case 3: j[key].erase(rng() % 18); valid = false; break;
      case 4: j[key].push_back(0.5); valid = false; break;
      case 5: j.erase("report"); valid = false; break;
      case 6: j.erase("frontal"); j.erase("lateral"); valid = false; break;
      case 7: j["id"] = ""; valid = false; break;
      case 8: j[key][rng() % 18] = (rng() % 2) ? 0.0 : 1.0; break;  // boundaries are valid
    }
    std::istringstream in(record_line(j));
    if (valid) {
      EXPECT_NO_THROW(parse_corpus(in)) << j.dump();
    } else {
      EXPECT_THROW(parse_corpus(in), CorpusError) << j.dump();
    }
  }
}

TEST(LoadCorpus, RecordJsonRoundTrip) {
  const LoadedCorpus c = load_corpus(kSampleCorpus);
  std::string text;
  for (const auto& r : c.records) text += to_json_line(r) + "\n";
  std::istringstream in(text);
  const LoadedCorpus back = parse_corpus(in);
  ASSERT_EQ(back.records.size(), c.records.size());
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    EXPECT_EQ(back.records[i].id, c.records[i].id);
    EXPECT_EQ(back.records[i].frontal, c.records[i].frontal);
    EXPECT_EQ(back.records[i].lateral, c.records[i].lateral);
    EXPECT_EQ(back.records[i].report, c.records[i].report);
  }
}

TEST(Split, Counts) {
  const SplitCounts ten = split_counts(10);
  EXPECT_EQ(ten.train, 7u);
  EXPECT_EQ(ten.val, 1u);
  EXPECT_EQ(ten.test, 2u);
  const SplitCounts full = split_counts(3955);
  EXPECT_EQ(full.train, 2768u);
  EXPECT_EQ(full.val, 395u);
  EXPECT_EQ(full.test, 792u);
  const SplitCounts one = split_counts(1);
  EXPECT_EQ(one.train + one.val, 0u);
  EXPECT_EQ(one.test, 1u);
}

TEST(Split, PartitionPropertyAndDeterminism) {
  for (std::size_t n = 1; n <= 60; ++n) {
    const auto records = make_records(n);
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
      const SplitAssignment a = split(records, seed);
      const SplitCounts want = split_counts(n);
      EXPECT_EQ(a.train.size(), want.train);
      EXPECT_EQ(a.val.size(), want.val);
      EXPECT_EQ(a.test.size(), want.test);
      std::set<std::string> all(a.train.begin(), a.train.end());
      all.insert(a.val.begin(), a.val.end());
      all.insert(a.test.begin(), a.test.end());
      EXPECT_EQ(all.size(), n);
      EXPECT_EQ(to_json(split(records, seed)), to_json(a));
    }
  }
}

TEST(Split, SeedChangesOrder) {
  const auto records = make_records(50);
  EXPECT_NE(split(records, 1).train, split(records, 2).train);
}

TEST(Split, ManifestRoundTripAndLookup) {
  const auto records = make_records(10);
  const SplitAssignment a = split(records, 5);
  const SplitAssignment b = parse_manifest(to_json(a));
  EXPECT_EQ(b.seed, 5u);
  EXPECT_EQ(b.train, a.train);
  EXPECT_EQ(b.val, a.val);
  EXPECT_EQ(b.test, a.test);
  EXPECT_EQ(a.partition_of(a.val[0]), Partition::val);
  EXPECT_FALSE(a.partition_of("nope").has_value());
  EXPECT_THROW(parse_manifest("{}"), InputError);
  EXPECT_THROW(parse_manifest(R"({"seed":1,"train":["a"],"val":["a"],"test":[]})"), InputError);
}

TEST(Split, Errors) {
  EXPECT_THROW(split({}, 0), ContractError);
  EXPECT_EQ(parse_partition("val"), Partition::val);
  EXPECT_THROW(parse_partition("dev"), ContractError);
  EXPECT_EQ(to_string(Partition::test), "test");
}

TEST(Prompt, BothViewsGive36ScoreLines) {
  StudyRecord r{"a", constant_view(0.5), constant_view(0.25), "Normal chest."};
  const PromptRecord p = render_prompt(r, PromptMode::train);
  std::size_t score_lines = 0;
  std::istringstream in(p.input);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find(": ") != std::string::npos) ++score_lines;
  }
  EXPECT_EQ(score_lines, 36u);
  EXPECT_EQ(p.input.rfind("frontal:\nAtelectasis: 0.5000\n", 0), 0u);
  EXPECT_NE(p.input.find("lateral:\nAtelectasis: 0.2500"), std::string::npos);
  EXPECT_NE(p.input.back(), '\n');
  EXPECT_EQ(p.response, "Normal chest.");
  EXPECT_EQ(p.instruction, kPromptInstruction);
}

TEST(Prompt, LabelOrderIsStable) {
  StudyRecord r{"a", constant_view(0.1), std::nullopt, "x"};
  const std::string input = render_prompt(r, PromptMode::infer).input;
  std::size_t pos = 0;
  for (auto label : kConditionLabels) {
    const std::size_t at = input.find(std::string("\n") + std::string(label) + ": ", pos);
    ASSERT_NE(at, std::string::npos) << label;
    pos = at + 1;
  }
}

TEST(Prompt, AbsentViewAndInferMode) {
  StudyRecord r{"a", std::nullopt, constant_view(0.123456), "Report."};
  const PromptRecord p = render_prompt(r, PromptMode::infer);
  EXPECT_EQ(p.input.rfind("frontal:\nview absent\nlateral:\n", 0), 0u);
  EXPECT_NE(p.input.find("Atelectasis: 0.1235"), std::string::npos);
  EXPECT_TRUE(p.response.empty());
}

TEST(Prompt, ParseRoundTripToFourDecimals) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    StudyRecord r{"a", std::nullopt, std::nullopt, "x"};
    ViewScores v;
    for (double& s : v) s = unit(rng);
    if (trial % 3 != 1) r.frontal = v;
    if (trial % 3 != 0) r.lateral = v;
    const ParsedPromptInput parsed = parse_prompt_input(render_prompt(r, PromptMode::train).input);
    ASSERT_EQ(parsed.frontal.has_value(), r.frontal.has_value());
    ASSERT_EQ(parsed.lateral.has_value(), r.lateral.has_value());
    for (const auto* pair : {&parsed.frontal, &parsed.lateral}) {
      if (!*pair) continue;
      for (std::size_t i = 0; i < kConditionCount; ++i) ASSERT_LE(std::abs((**pair)[i] - v[i]), 5e-5 + 1e-12);
    }
  }
  EXPECT_THROW(parse_prompt_input("frontal:\nview absent"), InputError);
  EXPECT_THROW(parse_prompt_input("garbage"), InputError);
}

TEST(Prompt, AlpacaTextSections) {
  StudyRecord r{"a", constant_view(0.5), std::nullopt, "Clear."};
  const std::string text = to_alpaca_text(render_prompt(r, PromptMode::train));
  const auto i = text.find("### Instruction:"), n = text.find("### Input:"), s = text.find("### Response:");
  ASSERT_NE(i, std::string::npos);
  EXPECT_LT(i, n);
  EXPECT_LT(n, s);
  EXPECT_EQ(text.substr(text.size() - 6), "Clear.");
}

TEST(Export, TrainPartitionOfTenRecords) {
  const LoadedCorpus c = load_corpus(kSampleCorpus);
  const SplitAssignment s = split(c.records, 7);
  std::ostringstream out;
  EXPECT_EQ(export_prompts(c.records, s, Partition::train, PromptMode::train, out), 7u);
  std::istringstream lines(out.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const PromptRecord p = parse_prompt_line(line);
    EXPECT_FALSE(p.response.empty());
    ++count;
  }
  EXPECT_EQ(count, 7u);
}

TEST(Export, InferResponsesEmptyAndByteStable) {
  const LoadedCorpus c = load_corpus(kSampleCorpus);
  const SplitAssignment s = split(c.records, 3);
  std::ostringstream a, b;
  EXPECT_EQ(export_prompts(c.records, s, Partition::test, PromptMode::infer, a), 2u);
  export_prompts(c.records, s, Partition::test, PromptMode::infer, b);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream lines(a.str());
  std::string line;
  while (std::getline(lines, line)) EXPECT_TRUE(parse_prompt_line(line).response.empty());
}

TEST(Export, ManifestWithUnknownIdIsContractError) {
  const auto records = make_records(3);
  SplitAssignment s;
  s.train = {"r0", "ghost"};
  s.test = {"r1", "r2"};
  std::ostringstream out;
  EXPECT_THROW(export_prompts(records, s, Partition::train, PromptMode::train, out), ContractError);
}

}  // namespace
}  // namespace radq
