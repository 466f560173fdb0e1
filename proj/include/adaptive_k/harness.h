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

#ifndef ADAPTIVE_K_HARNESS_H_
#define ADAPTIVE_K_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adaptive_k/corpus.h"
#include "adaptive_k/embedder.h"
#include "adaptive_k/metrics.h"
#include "adaptive_k/selection.h"
#include "adaptive_k/synth.h"
#include "json.hpp"

namespace adaptive_k {

// One query with the context it is answered from.
struct EvalCase {
  Query query;
  std::shared_ptr<const Corpus> corpus;
  // When set, used as the similarity scores (corpus order) instead of
  // embedding the query.
  std::optional<std::vector<double>> planted_scores;
  // Embeddings for this case's corpus; falls back to EvalOptions::matrix.
  std::shared_ptr<const EmbeddingMatrix> matrix;
  // When set (and no planted scores), cosine against this query vector
  // instead of embedding the query text.
  std::optional<std::vector<float>> query_vector;
};

struct EvalOptions {
  // Used for cases without planted scores. The matrix must cover every id of
  // those cases' corpora. When a case has no query_vector the backend embeds
  // the query text.
  const EmbeddingBackend* backend = nullptr;
  const EmbeddingMatrix* matrix = nullptr;
  std::size_t jobs = 1;
  // Compute recall / diff-k / true-k. Requires relevance labels.
  bool label_metrics = true;
  // query id -> reader prediction, scored with SubEM against query.answers.
  std::map<std::string, std::string> predictions;
  // Overrides for oracle names used by self-route strategies; unlisted names
  // fall back to make_oracle().
  std::map<std::string, std::shared_ptr<const AnswerabilityOracle>> oracles;
};

struct EvalRow {
  std::string strategy;
  std::string query_id;
  QueryMetrics metrics;
  std::int64_t cutoff_k = -1;
  std::optional<std::int64_t> gap_index;
  std::optional<std::string> error;
};

struct StrategyAggregate {
  std::string strategy;
  std::size_t rows = 0;
  std::size_t errors = 0;
  MeanStd recall;
  MeanStd diff_k;
  MeanStd n_input_tokens;
  MeanStd n_chunks;
  MeanStd reduction_pct;
  MeanStd subem;

  bool operator==(const StrategyAggregate&) const = default;
};

struct EvalReport {
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> strategies;
  // Ordered by strategy (in `strategies` order), then query id.
  std::vector<EvalRow> rows;
  std::vector<StrategyAggregate> aggregates;
};

// Runs every strategy on every case. Failures are recorded as error rows and
// the run continues. Output is independent of `jobs`.
EvalReport run_eval(const std::vector<EvalCase>& cases,
                    const std::vector<StrategySpec>& strategies,
                    const EvalOptions& options = {});

// Aggregates rows per strategy label, skipping error rows and absent values.
std::vector<StrategyAggregate> aggregate(const std::vector<EvalRow>& rows,
                                         const std::vector<std::string>& strategies);

// True when report.aggregates equals aggregate(report.rows, ...), compared
// with a relative tolerance of 1e-9 (exact after a JSON round-trip).
bool aggregates_consistent(const EvalReport& report);

// Synthetic cases for `n_queries` queries; query i uses
// derive_seed(base.seed, i). With embed_dim > 0 the cases carry synthetic
// embedding vectors (cosine route) instead of planted scores.
std::vector<EvalCase> synthetic_cases(const SynthSpec& base,
                                      std::size_t n_queries,
                                      std::size_t embed_dim = 0);

// Same, with explicit per-query seeds.
std::vector<EvalCase> synthetic_cases_with_seeds(
    const SynthSpec& base, const std::vector<std::uint64_t>& seeds,
    std::size_t embed_dim = 0);

// Human-readable summary table (mean ± std per strategy).
std::string format_summary(const EvalReport& report);

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_HARNESS_H_
