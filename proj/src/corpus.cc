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

#include "adaptive_k/corpus.h"

#include <unistd.h>

#include <fstream>
#include <sstream>
#include <system_error>

#include "adaptive_k/errors.h"
#include "json.hpp"

namespace adaptive_k {
namespace {

using nlohmann::json;

// Calls `fn(line_number, record)` for each non-blank line of `contents`.
template <typename Fn>
void for_each_record(const std::string& contents, Fn&& fn) {
  std::istringstream in(contents);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_number, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) {
      throw ParseError(line_number, "record is not an object");
    }
    fn(line_number, record);
  }
}

std::string required_string(const json& record, const char* field,
                            std::size_t line) {
  const auto it = record.find(field);
  if (it == record.end()) {
    throw ParseError(line, std::string("missing field '") + field + "'");
  }
  if (!it->is_string()) {
    throw ParseError(line, std::string("field '") + field +
                               "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

Corpus::Corpus(std::vector<Chunk> chunks) : chunks_(std::move(chunks)) {
  index_.reserve(chunks_.size());
  for (std::size_t i = 0; i < chunks_.size(); ++i) {
    const Chunk& chunk = chunks_[i];
    if (chunk.token_count < 0) {
      throw ValidationError("chunk '" + chunk.id + "' has negative tokens");
    }
    if (chunk.text.empty() != (chunk.token_count == 0)) {
      throw ValidationError("chunk '" + chunk.id +
                            "': token count must be 0 iff text is empty");
    }
    if (!index_.emplace(chunk.id, i).second) {
      throw ValidationError("duplicate chunk id '" + chunk.id + "'");
    }
    total_tokens_ += chunk.token_count;
  }
}

std::optional<std::size_t> Corpus::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Chunk& Corpus::at(const std::string& id) const {
  const auto index = index_of(id);
  if (!index) throw ValidationError("unknown chunk id '" + id + "'");
  return chunks_[*index];
}

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(chunks_.size());
  for (const Chunk& chunk : chunks_) out.push_back(chunk.id);
  return out;
}

bool Corpus::has_labels() const {
  for (const Chunk& chunk : chunks_) {
    if (chunk.relevant.has_value()) return true;
  }
  return false;
}

std::size_t Corpus::relevant_count() const {
  std::size_t n = 0;
  for (const Chunk& chunk : chunks_) {
    if (chunk.relevant.value_or(false)) ++n;
  }
  return n;
}

Corpus parse_corpus(const std::string& contents, const Tokenizer& tokenizer) {
  std::vector<Chunk> chunks;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_record(contents, [&](std::size_t line, const json& record) {
    Chunk chunk;
    chunk.id = required_string(record, "id", line);
    chunk.text = required_string(record, "text", line);
    if (const auto it = record.find("relevant"); it != record.end()) {
      if (!it->is_boolean()) {
        throw ParseError(line, "field 'relevant' must be a boolean");
      }
      chunk.relevant = it->get<bool>();
    }
    if (const auto it = record.find("tokens"); it != record.end()) {
      if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
        throw ParseError(line, "field 'tokens' must be a non-negative integer");
      }
      chunk.token_count = it->get<std::int64_t>();
      if (chunk.text.empty() != (chunk.token_count == 0)) {
        throw ParseError(line, "field 'tokens' must be 0 iff text is empty");
      }
    } else {
      chunk.token_count = tokenizer.count(chunk.text);
    }
    if (const auto [it, inserted] = seen.emplace(chunk.id, line); !inserted) {
      throw ValidationError("line " + std::to_string(line) +
                            ": duplicate chunk id '" + chunk.id +
                            "' (first seen on line " +
                            std::to_string(it->second) + ")");
    }
    chunks.push_back(std::move(chunk));
  });
  return Corpus(std::move(chunks));
}

Corpus ingest_corpus(const std::filesystem::path& path,
                     const Tokenizer& tokenizer) {
  return parse_corpus(read_file(path), tokenizer);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const Chunk& chunk : corpus.chunks()) {
    json record = {{"id", chunk.id},
                   {"text", chunk.text},
                   {"tokens", chunk.token_count}};
    if (chunk.relevant) record["relevant"] = *chunk.relevant;
    out += record.dump();
    out += '\n';
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_corpus(corpus));
}

std::vector<Query> parse_queries(const std::string& contents) {
  std::vector<Query> queries;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_record(contents, [&](std::size_t line, const json& record) {
    Query query;
    query.id = required_string(record, "id", line);
    query.text = required_string(record, "text", line);
    if (const auto it = record.find("answers"); it != record.end()) {
      if (!it->is_array()) {
        throw ParseError(line, "field 'answers' must be an array of strings");
      }
      for (const json& answer : *it) {
        if (!answer.is_string()) {
          throw ParseError(line, "field 'answers' must be an array of strings");
        }
        query.answers.push_back(answer.get<std::string>());
      }
    }
    if (!seen.emplace(query.id, line).second) {
      throw ValidationError("line " + std::to_string(line) +
                            ": duplicate query id '" + query.id + "'");
    }
    queries.push_back(std::move(query));
  });
  return queries;
}

std::vector<Query> ingest_queries(const std::filesystem::path& path) {
  return parse_queries(read_file(path));
}

void write_queries(const std::vector<Query>& queries,
                   const std::filesystem::path& path) {
  std::string out;
  for (const Query& query : queries) {
    json record = {{"id", query.id}, {"text", query.text}};
    if (!query.answers.empty()) record["answers"] = query.answers;
    out += record.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path.string() + "'");
  }
}

}  // namespace adaptive_k
