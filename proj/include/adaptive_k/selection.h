/*
 * Copyright 2026 The Adaptive-k Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ADAPTIVE_K_SELECTION_H_
#define ADAPTIVE_K_SELECTION_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaptive_k/corpus.h"
#include "adaptive_k/similarity.h"

namespace adaptive_k {

enum class Strategy {
  kAdaptive,
  kFixedK,
  kFixedTokens,
  kFullContext,
  kZeroShot,
  kSelfRoute,
};

std::string strategy_name(Strategy strategy);

// Parameters of largest-gap selection.
struct AdaptiveParams {
  // Extra chunks retrieved past the gap.
  std::int64_t buffer = 5;
  // Only gaps whose drop completes within the top `search_fraction` of the
  // ranking are eligible.
  double search_fraction = 0.9;

  bool operator==(const AdaptiveParams&) const = default;
};

// Throws ConfigError unless buffer >= 0 and 0 < search_fraction <= 1.
void validate(const AdaptiveParams& params);

// A retrieved rank prefix.
struct Selection {
  Strategy strategy = Strategy::kZeroShot;
  // Canonical strategy string, e.g. "fixedk:3".
  std::string label;
  // Sorted position of the last pre-buffer chunk; -1 when nothing selected.
  std::int64_t cutoff_k = -1;
  // Ids in descending similarity order; always a prefix of the ranking.
  std::vector<std::string> selected_ids;
  std::int64_t selected_tokens = 0;
  // Set by adaptive selection only.
  std::optional<double> gap_value;
  std::optional<std::int64_t> gap_index;
  // Set by self-route only: whether the first stage was judged sufficient.
  std::optional<bool> answered_first_stage;
};

// Number of gap positions searched for n sorted scores. Gap i (the drop
// after sorted item i) is eligible iff i + 1 <= ceil(fraction * n); the
// result is clipped to [1, n - 1], and is 0 for n < 2.
std::size_t eligible_gap_count(std::size_t n, double search_fraction);

// Picks the cutoff at the largest drop between consecutive sorted scores.
// Ties go to the smallest index. Selects min(N, gap_index + 1 + buffer)
// chunks. For N == 1 the single chunk is selected with gap 0 at index 0.
// Throws EmptyCorpusError when N == 0.
Selection adaptive_k_select(const SimilarityProfile& profile,
                            const Corpus& corpus,
                            const AdaptiveParams& params = {});

Selection fixed_k_select(const SimilarityProfile& profile, const Corpus& corpus,
                         std::int64_t k);

// Longest rank prefix within `budget` tokens. A positive budget always gets
// at least the top chunk even if it alone is over budget.
Selection fixed_token_select(const SimilarityProfile& profile,
                             const Corpus& corpus, std::int64_t budget);

Selection full_context_select(const SimilarityProfile& profile,
                              const Corpus& corpus);

Selection zero_shot_select(const SimilarityProfile& profile,
                           const Corpus& corpus);

// Decides whether a reader could answer `query` from `chunks`.
class AnswerabilityOracle {
 public:
  virtual ~AnswerabilityOracle() = default;
  virtual bool can_answer(const Query& query,
                          std::span<const Chunk* const> chunks) const = 0;
  virtual std::string name() const = 0;
  // Oracles that return false here are called under a lock by the harness.
  virtual bool thread_safe() const { return true; }
};

class AlwaysYesOracle final : public AnswerabilityOracle {
 public:
  bool can_answer(const Query&, std::span<const Chunk* const>) const override {
    return true;
  }
  std::string name() const override { return "always-yes"; }
};

class AlwaysNoOracle final : public AnswerabilityOracle {
 public:
  bool can_answer(const Query&, std::span<const Chunk* const>) const override {
    return false;
  }
  std::string name() const override { return "always-no"; }
};

// Answerable iff at least one selected chunk is labeled relevant.
class LabelHeuristicOracle final : public AnswerabilityOracle {
 public:
  bool can_answer(const Query& query,
                  std::span<const Chunk* const> chunks) const override;
  std::string name() const override { return "label-heuristic"; }
};

// Built-in oracles by name; throws ConfigError for unknown names.
std::shared_ptr<const AnswerabilityOracle> make_oracle(const std::string& name);

inline constexpr std::int64_t kSelfRouteBudget = 5000;

// First stage: fixed_token_select(first_stage_budget). If the oracle accepts
// it, that selection is returned; otherwise the full context. Both outcomes
// carry the self-route tag. Oracle exceptions are rethrown as OracleError
// with the query id.
Selection self_route_select(const SimilarityProfile& profile,
                            const Corpus& corpus, const Query& query,
                            const AnswerabilityOracle& oracle,
                            std::int64_t first_stage_budget = kSelfRouteBudget);

// Parsed form of the strategy grammar:
//   adaptive[:B=<int>,frac=<float>]   fixedk:<int>   fixedtok:<int>
//   full   zeroshot   selfroute[:budget=<int>,oracle=<name>]
struct StrategySpec {
  Strategy strategy = Strategy::kAdaptive;
  AdaptiveParams adaptive;
  std::int64_t k = 0;
  std::int64_t budget = 0;
  std::string oracle = "label-heuristic";

  // Canonical string; parse_strategy(to_string()) == *this.
  std::string to_string() const;
  bool operator==(const StrategySpec&) const = default;
};

// Throws ConfigError describing the grammar on malformed input.
StrategySpec parse_strategy(const std::string& text);

// Runs the strategy. `oracle` is required for self-route (ConfigError if
// null); other strategies ignore it.
Selection select(const StrategySpec& spec, const SimilarityProfile& profile,
                 const Corpus& corpus, const Query& query,
                 const AnswerabilityOracle* oracle = nullptr);

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_SELECTION_H_
