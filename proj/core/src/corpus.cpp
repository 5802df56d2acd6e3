// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

#include "radq/corpus.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "shuffle.hpp"

namespace radq {

namespace {

using nlohmann::json;

std::string join_issues(const std::vector<CorpusIssue>& issues) {
  std::string msg = "corpus has " + std::to_string(issues.size()) + " invalid line(s)";
  for (const auto& issue : issues) msg += "\n  line " + std::to_string(issue.line) + ": " + issue.message;
  return msg;
}

// Appends problems to `problems`; returns the view if it is well-formed.
std::optional<ViewScores> parse_view(const json& doc, const char* key, std::vector<std::string>& problems) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_array()) {
    problems.push_back(std::string(key) + " must be an array of 18 scores or null");
    return std::nullopt;
  }
  if (it->size() != kConditionCount) {
    problems.push_back(std::string(key) + " has " + std::to_string(it->size()) + " scores, expected 18");
    return std::nullopt;
  }
  ViewScores scores{};
  bool ok = true;
  for (std::size_t i = 0; i < kConditionCount; ++i) {
    const json& v = (*it)[i];
    if (!v.is_number()) {
      problems.push_back(std::string(key) + "[" + std::to_string(i) + "] is not a number");
      ok = false;
      continue;
    }
    const double s = v.get<double>();
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
      problems.push_back(std::string(key) + "[" + std::to_string(i) + "]: score out of range");
      ok = false;
      continue;
    }
    scores[i] = s;
  }
  return ok ? std::optional<ViewScores>(scores) : std::nullopt;
}

json view_json(const std::optional<ViewScores>& view) {
  if (!view) return nullptr;
  return json(std::vector<double>(view->begin(), view->end()));
}

}  // namespace

CorpusError::CorpusError(std::vector<CorpusIssue> issues)
    : InputError(join_issues(issues)), issues_(std::move(issues)) {}

LoadedCorpus parse_corpus(std::istream& in) {
  LoadedCorpus out;
  std::vector<CorpusIssue> issues;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      issues.push_back({line_no, std::string("malformed JSON: ") + e.what()});
      continue;
    }
    if (!doc.is_object()) {
      issues.push_back({line_no, "record must be a JSON object"});
      continue;
    }
    std::vector<std::string> problems;
    StudyRecord rec;
    const auto id = doc.find("id");
    if (id == doc.end() || !id->is_string() || id->get<std::string>().empty()) {
      problems.emplace_back("id must be a nonempty string");
    } else {
      rec.id = id->get<std::string>();
      if (!seen.insert(rec.id).second) problems.push_back("duplicate id '" + rec.id + "'");
    }
    const auto report = doc.find("report");
    if (report == doc.end() || !report->is_string()) {
      problems.emplace_back("report must be a string");
    } else {
      rec.report = report->get<std::string>();
    }
    const std::size_t before = problems.size();
    rec.frontal = parse_view(doc, "frontal", problems);
    rec.lateral = parse_view(doc, "lateral", problems);
    if (problems.size() == before && !rec.frontal && !rec.lateral) {
      problems.emplace_back("both views missing");
    }
    if (!problems.empty()) {
      for (auto& p : problems) issues.push_back({line_no, std::move(p)});
      continue;
    }
    out.records.push_back(std::move(rec));
  }
  if (in.bad()) throw InputError("corpus: read failed");
  if (!issues.empty()) throw CorpusError(std::move(issues));
  if (out.records.empty()) out.warnings.emplace_back("corpus is empty");
  return out;
}

LoadedCorpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus '" + path + "'");
  return parse_corpus(in);
}

std::string to_json_line(const StudyRecord& record) {
  nlohmann::ordered_json doc;
  doc["id"] = record.id;
  doc["frontal"] = view_json(record.frontal);
  doc["lateral"] = view_json(record.lateral);
  doc["report"] = record.report;
  return doc.dump();
}

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::train: return "train";
    case Partition::val: return "val";
    case Partition::test: return "test";
  }
  return "unknown";
}

Partition parse_partition(std::string_view name) {
  if (name == "train") return Partition::train;
  if (name == "val") return Partition::val;
  if (name == "test") return Partition::test;
  throw ContractError("unknown partition '" + std::string(name) + "' (expected train, val or test)");
}

SplitCounts split_counts(std::size_t n) {
  SplitCounts c;
  c.train = n * 7 / 10;
  c.val = n / 10;
  c.test = n - c.train - c.val;
  return c;
}

const std::vector<std::string>& SplitAssignment::ids(Partition p) const {
  switch (p) {
    case Partition::train: return train;
    case Partition::val: return val;
    case Partition::test: return test;
  }
  throw ContractError("unknown partition");
}

std::optional<Partition> SplitAssignment::partition_of(std::string_view id) const {
  for (Partition p : {Partition::train, Partition::val, Partition::test}) {
    for (const auto& x : ids(p)) {
      if (x == id) return p;
    }
  }
  return std::nullopt;
}

SplitAssignment split(std::span<const StudyRecord> records, std::uint64_t seed) {
  if (records.empty()) throw ContractError("split: empty corpus");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  detail::shuffle(std::span<std::size_t>(order), rng);

  const SplitCounts counts = split_counts(records.size());
  SplitAssignment out;
  out.seed = seed;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string& id = records[order[i]].id;
    if (i < counts.train) {
      out.train.push_back(id);
    } else if (i < counts.train + counts.val) {
      out.val.push_back(id);
    } else {
      out.test.push_back(id);
    }
  }
  return out;
}

std::string to_json(const SplitAssignment& split, int indent) {
  nlohmann::ordered_json doc;
  doc["seed"] = split.seed;
  doc["train"] = split.train;
  doc["val"] = split.val;
  doc["test"] = split.test;
  return doc.dump(indent);
}

SplitAssignment parse_manifest(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    SplitAssignment s;
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.train = doc.at("train").get<std::vector<std::string>>();
    s.val = doc.at("val").get<std::vector<std::string>>();
    s.test = doc.at("test").get<std::vector<std::string>>();
    std::unordered_set<std::string> seen;
    for (const auto* ids : {&s.train, &s.val, &s.test}) {
      for (const auto& id : *ids) {
        if (!seen.insert(id).second) throw InputError("split manifest: id '" + id + "' listed twice");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("split manifest: ") + e.what());
  }
}

}  // namespace radq
