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

#ifndef ADAPTIVE_K_EMBEDDER_H_
#define ADAPTIVE_K_EMBEDDER_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adaptive_k/corpus.h"

namespace adaptive_k {

// N x d embeddings stored row-major exactly as the backend produced them,
// plus an id manifest aligning row i with a chunk id. Immutable once built.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  // Throws DimensionMismatchError when data.size() != ids.size() * dim or
  // dim == 0, ValidationError on duplicate ids or zero-norm rows.
  EmbeddingMatrix(std::string model_name, std::size_t dim,
                  std::vector<std::string> ids, std::vector<float> data);

  const std::string& model_name() const { return model_name_; }
  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<float>& data() const { return data_; }
  // L2 norms, computed on construction in double precision.
  const std::vector<double>& norms() const { return norms_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::optional<std::size_t> index_of(const std::string& id) const;

  // Returns a matrix holding the rows for `ids` in that order. Throws
  // ValidationError if an id is missing.
  EmbeddingMatrix select(std::span<const std::string> ids) const;

  bool operator==(const EmbeddingMatrix& other) const;

 private:
  std::string model_name_;
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Produces fixed-dimension vectors for texts. `embed` returns one vector per
// input, in input order. Implementations throw BackendError on failure.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<std::vector<float>> embed(
      std::span<const std::string> texts) const = 0;
  virtual std::string model_name() const = 0;
  virtual std::size_t dim() const = 0;
};

// Deterministic pseudo-random unit vector seeded by (FNV-1a(text), seed).
// Uses only integer mixing and IEEE double arithmetic so results are
// bit-identical across platforms.
std::vector<float> mock_embed(std::string_view text, std::size_t dim,
                              std::uint64_t seed);

class MockBackend final : public EmbeddingBackend {
 public:
  MockBackend(std::size_t dim, std::uint64_t seed);

  std::vector<std::vector<float>> embed(
      std::span<const std::string> texts) const override;
  std::string model_name() const override;
  std::size_t dim() const override { return dim_; }

  // Number of embed() invocations and texts embedded so far.
  std::size_t calls() const { return calls_.load(); }
  std::size_t texts_embedded() const { return texts_.load(); }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  mutable std::atomic<std::size_t> calls_{0};
  mutable std::atomic<std::size_t> texts_{0};
};

struct EmbedStats {
  bool cache_hit = false;
  std::size_t embedded = 0;  // texts sent to the backend
  std::size_t reused = 0;    // rows served from the cache
};

struct EmbedOptions {
  std::size_t batch_size = 32;
  // Concurrent backend batches; results are reassembled in input order.
  std::size_t parallelism = 1;
};

// Embeds `corpus`, reading and writing through the cache at `cache_path`.
// A cache whose rows cover every chunk id is a hit and makes no backend
// calls. Missing rows are embedded and the merged matrix is written back
// atomically. The result is aligned with corpus order.
//
// Throws DimensionMismatchError when the cache was written with a different
// dimension, ValidationError when it belongs to another model or a chunk has
// empty text, BackendError (carrying chunk ids) when the backend fails.
EmbeddingMatrix embed_corpus(const Corpus& corpus,
                             const EmbeddingBackend& backend,
                             const std::filesystem::path& cache_path,
                             const EmbedOptions& options = {},
                             EmbedStats* stats = nullptr);

// Embeds without any cache.
EmbeddingMatrix embed_corpus(const Corpus& corpus,
                             const EmbeddingBackend& backend,
                             const EmbedOptions& options = {});

// Throws ValidationError for empty text, DimensionMismatchError if the
// backend returns a vector of the wrong length.
std::vector<float> embed_query(const Query& query,
                               const EmbeddingBackend& backend);

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_EMBEDDER_H_
