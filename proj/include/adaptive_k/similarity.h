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

#ifndef ADAPTIVE_K_SIMILARITY_H_
#define ADAPTIVE_K_SIMILARITY_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adaptive_k/embedder.h"

namespace adaptive_k {

// Query-corpus similarities, both in corpus order and sorted descending.
struct SimilarityProfile {
  // Scores in the order of the ids passed to build_profile.
  std::vector<double> raw_scores;
  // raw_scores sorted non-increasing.
  std::vector<double> sorted_scores;
  // ranking[r] is the chunk id at sorted position r.
  std::vector<std::string> ranking;
  // order[r] is the index into the input id list at sorted position r.
  std::vector<std::size_t> order;

  std::size_t size() const { return sorted_scores.size(); }
};

// score[i] = <row_i, q> / (|q| |row_i|), accumulated in double precision.
//
// Throws DimensionMismatchError when q.size() != matrix.dim() and
// ValidationError when q has zero (or non-finite) norm.
std::vector<double> cosine_scores(std::span<const float> query,
                                  const EmbeddingMatrix& matrix);

// Sorts scores descending; equal scores are ordered by ascending chunk id.
// Throws ValidationError naming the chunk when a score is NaN, or when the
// lengths differ.
SimilarityProfile build_profile(std::vector<double> raw_scores,
                                std::span<const std::string> ids);

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_SIMILARITY_H_
