// Copyright 2026 The radqlora Authors
// SPDX-License-Identifier: Apache-2.0

// Exact unigram alignment for METEOR.
//
// Every maximum-cardinality exact alignment links min(count_c(w), count_r(w))
// occurrences of each word w. Among those, we want the fewest chunks. With
// links sorted by candidate index, chunks = matches - bonds, where a bond is
// a pair of links (i, j), (i + 1, j + 1). The search below walks candidate
// positions left to right, branching over which reference occurrence (or
// none) each position takes, and prunes with an upper bound on the bonds
// still reachable. The greedy longest-run alignment seeds the incumbent and
// is the answer for long inputs or when the node budget runs out.

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "radq/textmetrics.hpp"

namespace radq {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);
constexpr std::uint64_t kNodeBudget = 2'000'000;

struct Encoded {
  std::vector<int> cand;
  std::vector<int> ref;
  int vocab = 0;
};

Encoded encode(const TokenSequence& candidate, const TokenSequence& reference) {
  std::unordered_map<std::string, int> ids;
  Encoded e;
  auto id_of = [&](const std::string& tok) {
    auto [it, inserted] = ids.try_emplace(tok, static_cast<int>(ids.size()));
    return it->second;
  };
  for (const auto& t : candidate) e.cand.push_back(id_of(t));
  for (const auto& t : reference) e.ref.push_back(id_of(t));
  e.vocab = static_cast<int>(ids.size());
  return e;
}

// Links sorted by candidate index.
Alignment finish(std::vector<std::size_t> cand_to_ref, bool exact) {
  Alignment al;
  al.exact = exact;
  for (std::size_t i = 0; i < cand_to_ref.size(); ++i) {
    if (cand_to_ref[i] != kNone) al.links.emplace_back(i, cand_to_ref[i]);
  }
  al.chunks = count_chunks(al.links);
  return al;
}

// Repeatedly links the longest common run of still-unlinked positions.
std::vector<std::size_t> greedy_runs(const Encoded& e) {
  const std::size_t c = e.cand.size();
  const std::size_t r = e.ref.size();
  std::vector<std::size_t> cand_to_ref(c, kNone);
  std::vector<bool> ref_used(r, false);
  std::vector<std::size_t> prev(r + 1), cur(r + 1);
  while (true) {
    std::size_t best_len = 0, best_i = 0, best_j = 0;
    std::fill(prev.begin(), prev.end(), 0);
    for (std::size_t i = 1; i <= c; ++i) {
      cur[0] = 0;
      for (std::size_t j = 1; j <= r; ++j) {
        const bool ok = cand_to_ref[i - 1] == kNone && !ref_used[j - 1] &&
                        e.cand[i - 1] == e.ref[j - 1];
        cur[j] = ok ? prev[j - 1] + 1 : 0;
        if (cur[j] > best_len) {
          best_len = cur[j];
          best_i = i;
          best_j = j;
        }
      }
      std::swap(prev, cur);
    }
    if (best_len == 0) break;
    for (std::size_t t = 0; t < best_len; ++t) {
      cand_to_ref[best_i - best_len + t] = best_j - best_len + t;
      ref_used[best_j - best_len + t] = true;
    }
  }
  return cand_to_ref;
}

std::size_t bonds_of(const std::vector<std::size_t>& cand_to_ref) {
  std::size_t bonds = 0;
  for (std::size_t i = 1; i < cand_to_ref.size(); ++i) {
    if (cand_to_ref[i] != kNone && cand_to_ref[i - 1] != kNone &&
        cand_to_ref[i] == cand_to_ref[i - 1] + 1) {
      ++bonds;
    }
  }
  return bonds;
}

class ChunkSearch {
 public:
  ChunkSearch(const Encoded& e, std::vector<std::size_t> incumbent)
      : e_(e), best_(std::move(incumbent)), best_bonds_(bonds_of(best_)) {
    const std::size_t c = e_.cand.size();
    const std::size_t r = e_.ref.size();
    ref_positions_.resize(static_cast<std::size_t>(e_.vocab));
    for (std::size_t j = 0; j < r; ++j) ref_positions_[static_cast<std::size_t>(e_.ref[j])].push_back(j);

    std::vector<std::size_t> cand_count(static_cast<std::size_t>(e_.vocab), 0);
    for (int w : e_.cand) ++cand_count[static_cast<std::size_t>(w)];
    skip_budget_.resize(static_cast<std::size_t>(e_.vocab));
    for (std::size_t w = 0; w < skip_budget_.size(); ++w) {
      const std::size_t refs = ref_positions_[w].size();
      skip_budget_[w] = cand_count[w] > refs ? cand_count[w] - refs : 0;
    }

    // bond_possible_suffix[i] counts k >= i (k >= 1) such that some bond
    // between candidate positions k-1 and k is realizable at all.
    bond_possible_suffix_.assign(c + 1, 0);
    for (std::size_t k = c; k-- > 0;) {
      bool possible = false;
      if (k >= 1) {
        for (std::size_t j : ref_positions_[static_cast<std::size_t>(e_.cand[k])]) {
          if (j >= 1 && e_.ref[j - 1] == e_.cand[k - 1]) {
            possible = true;
            break;
          }
        }
      }
      bond_possible_suffix_[k] = bond_possible_suffix_[k + 1] + (possible ? 1 : 0);
    }

    cur_.assign(c, kNone);
    ref_used_.assign(r, false);
    skips_used_.assign(static_cast<std::size_t>(e_.vocab), 0);
  }

  // Returns false if the node budget ran out before the search completed.
  bool run() {
    dfs(0, 0);
    return !exhausted_;
  }

  std::vector<std::size_t> best() const { return best_; }

 private:
  void dfs(std::size_t i, std::size_t bonds) {
    if (exhausted_) return;
    if (++nodes_ > kNodeBudget) {
      exhausted_ = true;
      return;
    }
    if (bonds + bond_possible_suffix_[i] <= best_bonds_) return;
    if (i == cur_.size()) {
      best_bonds_ = bonds;
      best_ = cur_;
      return;
    }
    const auto w = static_cast<std::size_t>(e_.cand[i]);
    const std::size_t prev_j = i > 0 ? cur_[i - 1] : kNone;

    auto take = [&](std::size_t j) {
      const bool bond = prev_j != kNone && j == prev_j + 1;
      cur_[i] = j;
      ref_used_[j] = true;
      dfs(i + 1, bonds + (bond ? 1 : 0));
      ref_used_[j] = false;
      cur_[i] = kNone;
    };

    // The continuing link first: it is the only option that adds a bond.
    std::size_t continuing = kNone;
    if (prev_j != kNone && prev_j + 1 < e_.ref.size() && e_.ref[prev_j + 1] == e_.cand[i] &&
        !ref_used_[prev_j + 1]) {
      continuing = prev_j + 1;
      take(continuing);
    }
    for (std::size_t j : ref_positions_[w]) {
      if (j != continuing && !ref_used_[j]) take(j);
    }
    if (skips_used_[w] < skip_budget_[w]) {
      ++skips_used_[w];
      dfs(i + 1, bonds);
      --skips_used_[w];
    }
  }

  const Encoded& e_;
  std::vector<std::vector<std::size_t>> ref_positions_;
  std::vector<std::size_t> skip_budget_;
  std::vector<std::size_t> bond_possible_suffix_;
  std::vector<std::size_t> cur_;
  std::vector<bool> ref_used_;
  std::vector<std::size_t> skips_used_;
  std::vector<std::size_t> best_;
  std::size_t best_bonds_;
  std::uint64_t nodes_ = 0;
  bool exhausted_ = false;
};

}  // namespace

std::size_t count_chunks(std::span<const std::pair<std::size_t, std::size_t>> links) {
  std::size_t chunks = 0;
  for (std::size_t k = 0; k < links.size(); ++k) {
    const bool continues = k > 0 && links[k].first == links[k - 1].first + 1 &&
                           links[k].second == links[k - 1].second + 1;
    if (!continues) ++chunks;
  }
  return chunks;
}

Alignment align_unigrams(const TokenSequence& candidate, const TokenSequence& reference) {
  const Encoded e = encode(candidate, reference);
  std::vector<std::size_t> greedy = greedy_runs(e);
  if (candidate.size() > kMeteorExactSearchLimit || reference.size() > kMeteorExactSearchLimit) {
    return finish(std::move(greedy), false);
  }
  ChunkSearch search(e, std::move(greedy));
  const bool complete = search.run();
  return finish(search.best(), complete);
}

}  // namespace radq
