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

#include "adaptive_k/selection.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>

#include "adaptive_k/errors.h"

namespace adaptive_k {
namespace {

void check_aligned(const SimilarityProfile& profile, const Corpus& corpus) {
  if (profile.size() != corpus.size()) {
    throw ValidationError("profile has " + std::to_string(profile.size()) +
                          " scores but corpus has " +
                          std::to_string(corpus.size()) + " chunks");
  }
}

// Selects the top `count` ranked chunks.
Selection take_prefix(const SimilarityProfile& profile, const Corpus& corpus,
                      std::size_t count, Strategy strategy, std::string label) {
  check_aligned(profile, corpus);
  count = std::min(count, profile.size());
  Selection selection;
  selection.strategy = strategy;
  selection.label = std::move(label);
  selection.selected_ids.assign(profile.ranking.begin(),
                                profile.ranking.begin() +
                                    static_cast<std::ptrdiff_t>(count));
  for (const std::string& id : selection.selected_ids) {
    selection.selected_tokens += corpus.at(id).token_count;
  }
  selection.cutoff_k = static_cast<std::int64_t>(count) - 1;
  return selection;
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
  std::int64_t value = 0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc() ||
      result.ptr != text.data() + text.size()) {
    throw ConfigError("strategy: " + what + " expects an integer, got '" +
                      text + "'");
  }
  return value;
}

double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc() ||
      result.ptr != text.data() + text.size()) {
    throw ConfigError("strategy: " + what + " expects a number, got '" + text +
                      "'");
  }
  return value;
}

// Splits "k1=v1,k2=v2" into pairs.
std::vector<std::pair<std::string, std::string>> parse_options(
    const std::string& text, const std::string& strategy) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos
                                                      : comma - start);
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("strategy '" + strategy +
                        "': expected key=value, got '" + item + "'");
    }
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

constexpr char kGrammar[] =
    "expected one of adaptive[:B=<int>,frac=<float>], fixedk:<int>, "
    "fixedtok:<int>, full, zeroshot, selfroute[:budget=<int>,oracle=<name>]";

}  // namespace

std::string strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::kAdaptive: return "adaptive";
    case Strategy::kFixedK: return "fixedk";
    case Strategy::kFixedTokens: return "fixedtok";
    case Strategy::kFullContext: return "full";
    case Strategy::kZeroShot: return "zeroshot";
    case Strategy::kSelfRoute: return "selfroute";
  }
  return "unknown";
}

void validate(const AdaptiveParams& params) {
  if (params.buffer < 0) {
    throw ConfigError("adaptive: buffer B must be >= 0");
  }
  if (!(params.search_fraction > 0.0 && params.search_fraction <= 1.0)) {
    throw ConfigError("adaptive: frac must be in (0, 1]");
  }
}

std::size_t eligible_gap_count(std::size_t n, double search_fraction) {
  if (n < 2) return 0;
  // Guard against products like 0.7 * 10 = 7.000000000000001 rounding up.
  const double scaled = search_fraction * static_cast<double>(n);
  const auto limit = static_cast<std::size_t>(
      std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
  return std::clamp<std::size_t>(limit, 1, n - 1);
}

Selection adaptive_k_select(const SimilarityProfile& profile,
                            const Corpus& corpus,
                            const AdaptiveParams& params) {
  validate(params);
  check_aligned(profile, corpus);
  const std::size_t n = profile.size();
  if (n == 0) throw EmptyCorpusError("adaptive-k: corpus is empty");

  StrategySpec spec;
  spec.strategy = Strategy::kAdaptive;
  spec.adaptive = params;

  std::size_t gap_index = 0;
  double gap_value = 0.0;
  const auto& s = profile.sorted_scores;
  const std::size_t window = eligible_gap_count(n, params.search_fraction);
  for (std::size_t i = 0; i < window; ++i) {
    const double gap = s[i] - s[i + 1];
    if (i == 0 || gap > gap_value) {
      gap_value = gap;
      gap_index = i;
    }
  }

  const std::size_t count =
      gap_index + 1 + static_cast<std::size_t>(params.buffer);
  Selection selection =
      take_prefix(profile, corpus, count, Strategy::kAdaptive, spec.to_string());
  selection.cutoff_k = static_cast<std::int64_t>(gap_index);
  selection.gap_index = static_cast<std::int64_t>(gap_index);
  selection.gap_value = gap_value;
  return selection;
}

Selection fixed_k_select(const SimilarityProfile& profile, const Corpus& corpus,
                         std::int64_t k) {
  if (k < 0) throw ConfigError("fixedk: k must be >= 0");
  return take_prefix(profile, corpus, static_cast<std::size_t>(k),
                     Strategy::kFixedK, "fixedk:" + std::to_string(k));
}

Selection fixed_token_select(const SimilarityProfile& profile,
                             const Corpus& corpus, std::int64_t budget) {
  if (budget < 0) throw ConfigError("fixedtok: budget must be >= 0");
  check_aligned(profile, corpus);
  std::size_t count = 0;
  std::int64_t used = 0;
  for (const std::string& id : profile.ranking) {
    const std::int64_t tokens = corpus.at(id).token_count;
    if (used + tokens > budget) break;
    used += tokens;
    ++count;
  }
  if (count == 0 && budget > 0 && profile.size() > 0) count = 1;
  return take_prefix(profile, corpus, count, Strategy::kFixedTokens,
                     "fixedtok:" + std::to_string(budget));
}

Selection full_context_select(const SimilarityProfile& profile,
                              const Corpus& corpus) {
  return take_prefix(profile, corpus, profile.size(), Strategy::kFullContext,
                     "full");
}

Selection zero_shot_select(const SimilarityProfile& profile,
                           const Corpus& corpus) {
  return take_prefix(profile, corpus, 0, Strategy::kZeroShot, "zeroshot");
}

bool LabelHeuristicOracle::can_answer(
    const Query&, std::span<const Chunk* const> chunks) const {
  return std::any_of(chunks.begin(), chunks.end(), [](const Chunk* chunk) {
    return chunk->relevant.value_or(false);
  });
}

std::shared_ptr<const AnswerabilityOracle> make_oracle(const std::string& name) {
  if (name == "always-yes") return std::make_shared<AlwaysYesOracle>();
  if (name == "always-no") return std::make_shared<AlwaysNoOracle>();
  if (name == "label-heuristic") {
    return std::make_shared<LabelHeuristicOracle>();
  }
  throw ConfigError("unknown answerability oracle '" + name +
                    "' (expected always-yes, always-no, label-heuristic)");
}

Selection self_route_select(const SimilarityProfile& profile,
                            const Corpus& corpus, const Query& query,
                            const AnswerabilityOracle& oracle,
                            std::int64_t first_stage_budget) {
  StrategySpec spec;
  spec.strategy = Strategy::kSelfRoute;
  spec.budget = first_stage_budget;
  spec.oracle = oracle.name();

  Selection first = fixed_token_select(profile, corpus, first_stage_budget);
  std::vector<const Chunk*> chunks;
  chunks.reserve(first.selected_ids.size());
  for (const std::string& id : first.selected_ids) {
    chunks.push_back(&corpus.at(id));
  }
  bool answerable = false;
  try {
    answerable = oracle.can_answer(query, chunks);
  } catch (const OracleError&) {
    throw;
  } catch (const std::exception& e) {
    throw OracleError(query.id, e.what());
  }
  Selection out =
      answerable ? std::move(first) : full_context_select(profile, corpus);
  out.strategy = Strategy::kSelfRoute;
  out.label = spec.to_string();
  out.answered_first_stage = answerable;
  return out;
}

std::string StrategySpec::to_string() const {
  switch (strategy) {
    case Strategy::kAdaptive:
      return "adaptive:B=" + std::to_string(adaptive.buffer) +
             ",frac=" + format_double(adaptive.search_fraction);
    case Strategy::kFixedK:
      return "fixedk:" + std::to_string(k);
    case Strategy::kFixedTokens:
      return "fixedtok:" + std::to_string(budget);
    case Strategy::kFullContext:
      return "full";
    case Strategy::kZeroShot:
      return "zeroshot";
    case Strategy::kSelfRoute:
      return "selfroute:budget=" + std::to_string(budget) + ",oracle=" + oracle;
  }
  return "unknown";
}

StrategySpec parse_strategy(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const bool has_args = colon != std::string::npos;
  const std::string args = has_args ? text.substr(colon + 1) : std::string();

  StrategySpec spec;
  if (name == "adaptive") {
    spec.strategy = Strategy::kAdaptive;
    if (has_args) {
      for (const auto& [key, value] : parse_options(args, text)) {
        if (key == "B" || key == "b") {
          spec.adaptive.buffer = parse_int(value, "B");
        } else if (key == "frac") {
          spec.adaptive.search_fraction = parse_double(value, "frac");
        } else {
          throw ConfigError("strategy '" + text + "': unknown option '" + key +
                            "' (expected B, frac)");
        }
      }
    }
    validate(spec.adaptive);
  } else if (name == "fixedk") {
    if (!has_args) throw ConfigError("strategy 'fixedk' needs :<int>");
    spec.strategy = Strategy::kFixedK;
    spec.k = parse_int(args, "fixedk");
    if (spec.k < 0) throw ConfigError("fixedk: k must be >= 0");
  } else if (name == "fixedtok") {
    if (!has_args) throw ConfigError("strategy 'fixedtok' needs :<int>");
    spec.strategy = Strategy::kFixedTokens;
    spec.budget = parse_int(args, "fixedtok");
    if (spec.budget < 0) throw ConfigError("fixedtok: budget must be >= 0");
  } else if ((name == "full" || name == "zeroshot") && !has_args) {
    spec.strategy =
        name == "full" ? Strategy::kFullContext : Strategy::kZeroShot;
  } else if (name == "selfroute") {
    spec.strategy = Strategy::kSelfRoute;
    spec.budget = kSelfRouteBudget;
    if (has_args) {
      for (const auto& [key, value] : parse_options(args, text)) {
        if (key == "budget") {
          spec.budget = parse_int(value, "budget");
        } else if (key == "oracle") {
          make_oracle(value);
          spec.oracle = value;
        } else {
          throw ConfigError("strategy '" + text + "': unknown option '" + key +
                            "' (expected budget, oracle)");
        }
      }
    }
    if (spec.budget < 0) throw ConfigError("selfroute: budget must be >= 0");
  } else {
    throw ConfigError("unknown strategy '" + text + "': " + kGrammar);
  }
  return spec;
}

Selection select(const StrategySpec& spec, const SimilarityProfile& profile,
                 const Corpus& corpus, const Query& query,
                 const AnswerabilityOracle* oracle) {
  switch (spec.strategy) {
    case Strategy::kAdaptive:
      return adaptive_k_select(profile, corpus, spec.adaptive);
    case Strategy::kFixedK:
      return fixed_k_select(profile, corpus, spec.k);
    case Strategy::kFixedTokens:
      return fixed_token_select(profile, corpus, spec.budget);
    case Strategy::kFullContext:
      return full_context_select(profile, corpus);
    case Strategy::kZeroShot:
      return zero_shot_select(profile, corpus);
    case Strategy::kSelfRoute:
      if (oracle == nullptr) {
        throw ConfigError("selfroute requires an answerability oracle");
      }
      return self_route_select(profile, corpus, query, *oracle, spec.budget);
  }
  throw ConfigError("unhandled strategy");
}

}  // namespace adaptive_k
