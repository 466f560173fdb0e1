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

#ifndef ADAPTIVE_K_CORPUS_H_
#define ADAPTIVE_K_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "adaptive_k/tokenizer.h"

namespace adaptive_k {

// One pre-chunked context passage.
struct Chunk {
  std::string id;
  std::string text;
  std::int64_t token_count = 0;
  // Ground-truth relevance; absent when the source carried no label.
  std::optional<bool> relevant;

  bool operator==(const Chunk&) const = default;
};

struct Query {
  std::string id;
  std::string text;
  // Gold answers for substring exact match; empty when not provided.
  std::vector<std::string> answers;

  bool operator==(const Query&) const = default;
};

// An immutable, ordered set of chunks with unique ids. File order is the
// canonical order; positions in derived arrays always map back to ids.
class Corpus {
 public:
  Corpus() = default;

  // Throws ValidationError on duplicate ids, negative token counts, or an
  // empty/non-empty mismatch between text and token_count.
  explicit Corpus(std::vector<Chunk> chunks);

  const std::vector<Chunk>& chunks() const { return chunks_; }
  std::size_t size() const { return chunks_.size(); }
  bool empty() const { return chunks_.empty(); }
  const Chunk& operator[](std::size_t i) const { return chunks_[i]; }
  std::int64_t total_tokens() const { return total_tokens_; }

  // Index of `id` in file order, or nullopt.
  std::optional<std::size_t> index_of(const std::string& id) const;
  const Chunk& at(const std::string& id) const;

  std::vector<std::string> ids() const;

  // True when at least one chunk carries a relevance label.
  bool has_labels() const;
  std::size_t relevant_count() const;

 private:
  std::vector<Chunk> chunks_;
  std::unordered_map<std::string, std::size_t> index_;
  std::int64_t total_tokens_ = 0;
};

// Reads a line-delimited corpus file (`id`, `text`, optional `relevant`,
// optional `tokens`). Blank lines are skipped. Throws ParseError naming the
// 1-based line number for malformed records, ValidationError for duplicate
// ids, IoError when the file cannot be opened.
Corpus ingest_corpus(const std::filesystem::path& path,
                     const Tokenizer& tokenizer);

// Same record grammar as ingest_corpus, reading from an in-memory buffer.
Corpus parse_corpus(const std::string& contents, const Tokenizer& tokenizer);

// Writes one record per chunk. `tokens` is always emitted so re-ingesting
// with any tokenizer reproduces the counts.
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);

// Query files share the record shape, with optional `answers`.
std::vector<Query> ingest_queries(const std::filesystem::path& path);
std::vector<Query> parse_queries(const std::string& contents);
void write_queries(const std::vector<Query>& queries,
                   const std::filesystem::path& path);

// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_CORPUS_H_
