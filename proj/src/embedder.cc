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

#include "adaptive_k/embedder.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <bit>

#include "adaptive_k/embedding_cache.h"
#include "adaptive_k/errors.h"
#include "random.h"

namespace adaptive_k {
namespace {

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < 8; ++i) {
    if (i > 0) out += ", ";
    out += ids[i];
  }
  if (ids.size() > 8) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

struct Batch {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
};

std::vector<std::vector<float>> run_batch(const EmbeddingBackend& backend,
                                          const Batch& batch) {
  std::vector<std::vector<float>> vectors;
  try {
    vectors = backend.embed(batch.texts);
  } catch (const BackendError& e) {
    throw BackendError(e.what(), batch.ids);
  } catch (const DimensionMismatchError&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendError(std::string("embedding backend failed: ") + e.what(),
                       batch.ids);
  }
  if (vectors.size() != batch.texts.size()) {
    throw BackendError("backend returned " + std::to_string(vectors.size()) +
                           " vectors for " +
                           std::to_string(batch.texts.size()) +
                           " texts (chunks: " + join_ids(batch.ids) + ")",
                       batch.ids);
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != backend.dim()) {
      throw DimensionMismatchError(
          "backend returned dimension " + std::to_string(vectors[i].size()) +
          " for chunk '" + batch.ids[i] + "', expected " +
          std::to_string(backend.dim()));
    }
  }
  return vectors;
}

// Embeds (ids, texts) in batches, at most `parallelism` in flight, and
// returns the flattened row-major data in input order.
std::vector<float> embed_batched(const EmbeddingBackend& backend,
                                 const std::vector<std::string>& ids,
                                 const std::vector<std::string>& texts,
                                 const EmbedOptions& options) {
  const std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < ids.size(); start += batch_size) {
    const std::size_t end = std::min(ids.size(), start + batch_size);
    batches.push_back(
        {std::vector<std::string>(ids.begin() + start, ids.begin() + end),
         std::vector<std::string>(texts.begin() + start,
                                  texts.begin() + end)});
  }

  std::vector<std::vector<std::vector<float>>> results(batches.size());
  const std::size_t parallelism = std::max<std::size_t>(1, options.parallelism);
  if (parallelism == 1 || batches.size() <= 1) {
    for (std::size_t b = 0; b < batches.size(); ++b) {
      results[b] = run_batch(backend, batches[b]);
    }
  } else {
    for (std::size_t wave = 0; wave < batches.size(); wave += parallelism) {
      const std::size_t wave_end = std::min(batches.size(), wave + parallelism);
      std::vector<std::future<std::vector<std::vector<float>>>> pending;
      for (std::size_t b = wave; b < wave_end; ++b) {
        pending.push_back(std::async(std::launch::async, run_batch,
                                     std::cref(backend), std::cref(batches[b])));
      }
      // Collect everything first so no future is abandoned mid-flight.
      std::exception_ptr first_error;
      for (std::size_t b = wave; b < wave_end; ++b) {
        try {
          results[b] = pending[b - wave].get();
        } catch (...) {
          if (!first_error) first_error = std::current_exception();
        }
      }
      if (first_error) std::rethrow_exception(first_error);
    }
  }

  std::vector<float> data;
  data.reserve(ids.size() * backend.dim());
  for (const auto& batch : results) {
    for (const auto& vec : batch) data.insert(data.end(), vec.begin(), vec.end());
  }
  return data;
}

void reject_empty_texts(const Corpus& corpus) {
  std::vector<std::string> empty;
  for (const Chunk& chunk : corpus.chunks()) {
    if (chunk.text.empty()) empty.push_back(chunk.id);
  }
  if (!empty.empty()) {
    throw ValidationError("cannot embed chunks with empty text: " +
                          join_ids(empty));
  }
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::string model_name, std::size_t dim,
                                 std::vector<std::string> ids,
                                 std::vector<float> data)
    : model_name_(std::move(model_name)),
      dim_(dim),
      ids_(std::move(ids)),
      data_(std::move(data)) {
  if (dim_ == 0) throw DimensionMismatchError("embedding dimension must be >= 1");
  if (data_.size() != ids_.size() * dim_) {
    throw DimensionMismatchError(
        "embedding data holds " + std::to_string(data_.size()) +
        " floats, expected " + std::to_string(ids_.size()) + " x " +
        std::to_string(dim_));
  }
  norms_.resize(ids_.size());
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    double sum = 0.0;
    for (const float x : row(i)) sum += static_cast<double>(x) * x;
    norms_[i] = std::sqrt(sum);
    if (!(norms_[i] > 0.0) || !std::isfinite(norms_[i])) {
      throw ValidationError("embedding for '" + ids_[i] +
                            "' has zero or non-finite norm");
    }
    if (!index_.emplace(ids_[i], i).second) {
      throw ValidationError("duplicate embedding id '" + ids_[i] + "'");
    }
  }
}

std::optional<std::size_t> EmbeddingMatrix::index_of(
    const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingMatrix EmbeddingMatrix::select(
    std::span<const std::string> ids) const {
  std::vector<float> data;
  data.reserve(ids.size() * dim_);
  for (const std::string& id : ids) {
    const auto index = index_of(id);
    if (!index) throw ValidationError("no embedding for chunk '" + id + "'");
    const auto r = row(*index);
    data.insert(data.end(), r.begin(), r.end());
  }
  return EmbeddingMatrix(model_name_, dim_,
                         std::vector<std::string>(ids.begin(), ids.end()),
                         std::move(data));
}

bool EmbeddingMatrix::operator==(const EmbeddingMatrix& other) const {
  if (model_name_ != other.model_name_ || dim_ != other.dim_ ||
      ids_ != other.ids_ || data_.size() != other.data_.size()) {
    return false;
  }
  // Bitwise, so -0.0f != 0.0f and NaN payloads compare exactly.
  return std::equal(data_.begin(), data_.end(), other.data_.begin(),
                    [](float a, float b) {
                      return std::bit_cast<std::uint32_t>(a) ==
                             std::bit_cast<std::uint32_t>(b);
                    });
}

std::vector<float> mock_embed(std::string_view text, std::size_t dim,
                              std::uint64_t seed) {
  if (dim == 0) throw ValidationError("mock_embed: dim must be >= 1");
  internal::Rng rng(internal::fnv1a64(text) ^ (seed * 0xd1342543de82ef95ULL));
  std::vector<double> raw(dim);
  double sum = 0.0;
  for (double& x : raw) {
    x = rng.uniform(-1.0, 1.0);
    sum += x * x;
  }
  if (sum == 0.0) {
    raw[0] = 1.0;
    sum = 1.0;
  }
  const double norm = std::sqrt(sum);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    out[i] = static_cast<float>(raw[i] / norm);
  }
  return out;
}

MockBackend::MockBackend(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw ValidationError("mock backend: dim must be >= 1");
}

std::vector<std::vector<float>> MockBackend::embed(
    std::span<const std::string> texts) const {
  ++calls_;
  texts_ += texts.size();
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const std::string& text : texts) {
    out.push_back(mock_embed(text, dim_, seed_));
  }
  return out;
}

std::string MockBackend::model_name() const {
  return "mock-d" + std::to_string(dim_) + "-s" + std::to_string(seed_);
}

EmbeddingMatrix embed_corpus(const Corpus& corpus,
                             const EmbeddingBackend& backend,
                             const EmbedOptions& options) {
  reject_empty_texts(corpus);
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const Chunk& chunk : corpus.chunks()) texts.push_back(chunk.text);
  const auto ids = corpus.ids();
  return EmbeddingMatrix(backend.model_name(), backend.dim(), ids,
                         embed_batched(backend, ids, texts, options));
}

EmbeddingMatrix embed_corpus(const Corpus& corpus,
                             const EmbeddingBackend& backend,
                             const std::filesystem::path& cache_path,
                             const EmbedOptions& options, EmbedStats* stats) {
  reject_empty_texts(corpus);
  EmbedStats local;
  std::optional<EmbeddingMatrix> cached;
  if (std::filesystem::exists(cache_path)) {
    const CacheHeader header = read_cache_header(cache_path);
    if (header.dim != backend.dim()) {
      throw DimensionMismatchError(
          "cache '" + cache_path.string() + "' has dimension " +
          std::to_string(header.dim) + " but backend '" +
          backend.model_name() + "' produces " +
          std::to_string(backend.dim()));
    }
    if (header.model_name != backend.model_name()) {
      throw ValidationError("cache '" + cache_path.string() +
                            "' was written by model '" + header.model_name +
                            "', not '" + backend.model_name() + "'");
    }
    cached = read_cache(cache_path);
  }

  std::vector<std::string> missing_ids;
  std::vector<std::string> missing_texts;
  for (const Chunk& chunk : corpus.chunks()) {
    if (!cached || !cached->index_of(chunk.id)) {
      missing_ids.push_back(chunk.id);
      missing_texts.push_back(chunk.text);
    }
  }
  local.reused = corpus.size() - missing_ids.size();
  local.embedded = missing_ids.size();
  local.cache_hit = cached.has_value() && missing_ids.empty();

  if (local.cache_hit) {
    if (stats) *stats = local;
    const auto ids = corpus.ids();
    return cached->select(ids);
  }

  std::vector<float> fresh =
      embed_batched(backend, missing_ids, missing_texts, options);
  std::vector<std::string> all_ids;
  std::vector<float> all_data;
  if (cached) {
    all_ids = cached->ids();
    all_data = cached->data();
  }
  all_ids.insert(all_ids.end(), missing_ids.begin(), missing_ids.end());
  all_data.insert(all_data.end(), fresh.begin(), fresh.end());
  EmbeddingMatrix merged(backend.model_name(), backend.dim(),
                         std::move(all_ids), std::move(all_data));
  write_cache(merged, cache_path);

  if (stats) *stats = local;
  const auto ids = corpus.ids();
  return merged.select(ids);
}

std::vector<float> embed_query(const Query& query,
                               const EmbeddingBackend& backend) {
  if (query.text.empty()) {
    throw ValidationError("query '" + query.id + "' has empty text");
  }
  const std::vector<std::string> texts = {query.text};
  std::vector<std::vector<float>> vectors;
  try {
    vectors = backend.embed(texts);
  } catch (const BackendError& e) {
    throw BackendError(e.what(), {query.id});
  } catch (const std::exception& e) {
    throw BackendError(std::string("embedding backend failed: ") + e.what(),
                       {query.id});
  }
  if (vectors.size() != 1) {
    throw BackendError("backend returned " + std::to_string(vectors.size()) +
                           " vectors for one query",
                       {query.id});
  }
  if (vectors[0].size() != backend.dim()) {
    throw DimensionMismatchError(
        "query embedding has dimension " + std::to_string(vectors[0].size()) +
        ", expected " + std::to_string(backend.dim()));
  }
  return std::move(vectors[0]);
}

}  // namespace adaptive_k
