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

#ifndef ADAPTIVE_K_METRICS_H_
#define ADAPTIVE_K_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptive_k/corpus.h"
#include "adaptive_k/selection.h"
#include "adaptive_k/similarity.h"

namespace adaptive_k {

struct QueryMetrics {
  std::optional<double> context_recall;  // percent
  std::optional<std::int64_t> diff_k;
  std::optional<std::int64_t> true_k;
  std::int64_t n_input_tokens = 0;
  std::int64_t n_selected_chunks = 0;
  std::optional<double> reduction_pct;
  std::optional<int> subem;
};

// 100 * |selected ∩ relevant| / |relevant|. Throws MissingLabelsError when
// no chunk is labeled relevant.
double context_recall(const Selection& selection, const Corpus& corpus);

// Sorted position (0-based) of the lowest-ranked relevant chunk, i.e. the
// smallest cutoff reaching full recall.
std::int64_t true_k(const SimilarityProfile& profile, const Corpus& corpus);

// |effective_k - true_k| with effective_k = |selected| - 1 (so an empty
// selection counts as -1).
std::int64_t diff_k(const Selection& selection,
                    const SimilarityProfile& profile, const Corpus& corpus);

// 100 * (1 - n_input / n_full). Not clamped: n_input > n_full gives a
// negative value. Throws ValidationError when n_full <= 0 or n_input < 0.
double token_reduction(double n_input, double n_full);

// Lowercases ASCII, collapses whitespace runs to one space, and strips
// leading/trailing ASCII punctuation and whitespace.
std::string normalize_answer(std::string_view text);

// 1 iff some normalized gold answer is a substring of the normalized
// prediction. Answers that normalize to the empty string never match.
// Throws ValidationError when `answers` is empty.
int subem(std::string_view prediction, std::span<const std::string> answers);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t count = 0;

  bool operator==(const MeanStd&) const = default;
};

// Mean and population std. Empty input yields {0, 0, 0}.
MeanStd mean_std(std::span<const double> values);

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_METRICS_H_
