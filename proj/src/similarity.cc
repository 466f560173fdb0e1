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

#include "adaptive_k/similarity.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adaptive_k/errors.h"

namespace adaptive_k {
namespace {

// Four independent accumulators let the compiler vectorize the loop while
// keeping double-precision sums.
double dot(std::span<const float> a, std::span<const float> b) {
  const std::size_t n = a.size();
  double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 += static_cast<double>(a[i]) * b[i];
    acc1 += static_cast<double>(a[i + 1]) * b[i + 1];
    acc2 += static_cast<double>(a[i + 2]) * b[i + 2];
    acc3 += static_cast<double>(a[i + 3]) * b[i + 3];
  }
  for (; i < n; ++i) acc0 += static_cast<double>(a[i]) * b[i];
  return (acc0 + acc1) + (acc2 + acc3);
}

}  // namespace

std::vector<double> cosine_scores(std::span<const float> query,
                                  const EmbeddingMatrix& matrix) {
  if (query.size() != matrix.dim()) {
    throw DimensionMismatchError("query has dimension " +
                                 std::to_string(query.size()) +
                                 ", corpus embeddings have " +
                                 std::to_string(matrix.dim()));
  }
  const double query_norm = std::sqrt(dot(query, query));
  if (!(query_norm > 0.0) || !std::isfinite(query_norm)) {
    throw ValidationError("query embedding has zero or non-finite norm");
  }
  std::vector<double> scores(matrix.rows());
  const auto& norms = matrix.norms();
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    scores[i] = dot(matrix.row(i), query) / (query_norm * norms[i]);
  }
  return scores;
}

SimilarityProfile build_profile(std::vector<double> raw_scores,
                                std::span<const std::string> ids) {
  if (raw_scores.size() != ids.size()) {
    throw ValidationError("build_profile: " + std::to_string(raw_scores.size()) +
                          " scores for " + std::to_string(ids.size()) + " ids");
  }
  for (std::size_t i = 0; i < raw_scores.size(); ++i) {
    if (!std::isfinite(raw_scores[i])) {
      throw ValidationError("similarity for chunk '" + ids[i] +
                            "' is not finite (NaN or inf)");
    }
  }
  SimilarityProfile profile;
  profile.order.resize(raw_scores.size());
  std::iota(profile.order.begin(), profile.order.end(), std::size_t{0});
  std::sort(profile.order.begin(), profile.order.end(),
            [&](std::size_t a, std::size_t b) {
              if (raw_scores[a] != raw_scores[b]) {
                return raw_scores[a] > raw_scores[b];
              }
              return ids[a] < ids[b];
            });
  profile.sorted_scores.reserve(raw_scores.size());
  profile.ranking.reserve(raw_scores.size());
  for (const std::size_t i : profile.order) {
    profile.sorted_scores.push_back(raw_scores[i]);
    profile.ranking.push_back(ids[i]);
  }
  profile.raw_scores = std::move(raw_scores);
  return profile;
}

}  // namespace adaptive_k
