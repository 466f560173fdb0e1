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

#include "adaptive_k/metrics.h"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "adaptive_k/errors.h"

namespace adaptive_k {
namespace {

void require_relevant(const Corpus& corpus, const char* metric) {
  if (corpus.relevant_count() == 0) {
    throw MissingLabelsError(std::string(metric) +
                             " needs at least one chunk labeled relevant");
  }
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace

double context_recall(const Selection& selection, const Corpus& corpus) {
  require_relevant(corpus, "context recall");
  std::size_t hits = 0;
  for (const std::string& id : selection.selected_ids) {
    if (corpus.at(id).relevant.value_or(false)) ++hits;
  }
  return 100.0 * static_cast<double>(hits) /
         static_cast<double>(corpus.relevant_count());
}

std::int64_t true_k(const SimilarityProfile& profile, const Corpus& corpus) {
  require_relevant(corpus, "true k");
  std::int64_t last = -1;
  for (std::size_t r = 0; r < profile.ranking.size(); ++r) {
    if (corpus.at(profile.ranking[r]).relevant.value_or(false)) {
      last = static_cast<std::int64_t>(r);
    }
  }
  return last;
}

std::int64_t diff_k(const Selection& selection,
                    const SimilarityProfile& profile, const Corpus& corpus) {
  const std::int64_t effective =
      static_cast<std::int64_t>(selection.selected_ids.size()) - 1;
  return std::llabs(effective - true_k(profile, corpus));
}

double token_reduction(double n_input, double n_full) {
  if (!(n_full > 0.0)) {
    throw ValidationError("token reduction: full-context token count is 0");
  }
  if (n_input < 0.0) {
    throw ValidationError("token reduction: negative input token count");
  }
  return 100.0 * (1.0 - n_input / n_full);
}

std::string normalize_answer(std::string_view text) {
  std::string collapsed;
  collapsed.reserve(text.size());
  bool pending_space = false;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed.push_back(' ');
    pending_space = false;
    collapsed.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  std::size_t begin = 0;
  std::size_t end = collapsed.size();
  while (begin < end && (is_punct(collapsed[begin]) || is_space(collapsed[begin]))) {
    ++begin;
  }
  while (end > begin &&
         (is_punct(collapsed[end - 1]) || is_space(collapsed[end - 1]))) {
    --end;
  }
  return collapsed.substr(begin, end - begin);
}

int subem(std::string_view prediction, std::span<const std::string> answers) {
  if (answers.empty()) throw ValidationError("subem: no gold answers given");
  const std::string normalized = normalize_answer(prediction);
  for (const std::string& answer : answers) {
    const std::string gold = normalize_answer(answer);
    if (!gold.empty() && normalized.find(gold) != std::string::npos) return 1;
  }
  return 0;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (const double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (const double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(values.size()));
  return out;
}

}  // namespace adaptive_k
