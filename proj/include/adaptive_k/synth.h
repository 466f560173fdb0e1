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

#ifndef ADAPTIVE_K_SYNTH_H_
#define ADAPTIVE_K_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "adaptive_k/corpus.h"
#include "adaptive_k/embedder.h"

namespace adaptive_k {

struct SimRange {
  double low = 0.0;
  double high = 0.0;

  bool operator==(const SimRange&) const = default;
};

// Controlled-information corpus: `info_amount` tokens of relevant chunks
// hidden among `total_tokens` of context.
struct SynthSpec {
  std::int64_t total_tokens = 100000;
  std::int64_t info_amount = 10000;
  std::int64_t chunk_tokens_mean = 50;
  std::uint64_t seed = 0;
  SimRange relevant_sim{0.55, 0.85};
  SimRange irrelevant_sim{0.05, 0.45};
  // Fraction of relevant chunks whose planted similarity is drawn from the
  // irrelevant range instead, making them hard to retrieve.
  double noise_overlap = 0.0;

  bool operator==(const SynthSpec&) const = default;
};

// Throws ConfigError for infeasible specs: info_amount outside
// [1, total_tokens], chunk mean < 1, ranges outside [-1, 1] or inverted, or
// overlapping ranges when noise_overlap == 0.
void validate(const SynthSpec& spec);

struct SynthCase {
  Corpus corpus;
  Query query;
  // Planted query-chunk similarities, in corpus order.
  std::vector<double> planted_scores;
};

// Chunk sizes are uniform in [mean/2, 3*mean/2], with the last chunk of each
// class truncated so relevant tokens sum to exactly info_amount and all
// tokens to total_tokens. Chunk order is shuffled. Every chunk text has
// exactly token_count whitespace tokens. Deterministic in spec.seed on every
// platform (no std distributions).
SynthCase generate_synthetic(const SynthSpec& spec);

struct SynthEmbeddings {
  EmbeddingMatrix matrix;
  std::vector<float> query;
};

// Builds vectors whose cosine with the query reproduces the planted scores:
// v = t * u + sqrt(1 - t^2) * w with w a random unit vector orthogonal to the
// query direction u. Requires dim >= 2.
SynthEmbeddings synthesize_embeddings(const SynthCase& synth, std::size_t dim,
                                      std::uint64_t seed);

// Seed for the i-th query of a sweep rooted at `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_SYNTH_H_
