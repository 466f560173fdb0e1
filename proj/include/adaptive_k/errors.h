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

#ifndef ADAPTIVE_K_ERRORS_H_
#define ADAPTIVE_K_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaptive_k {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes, so new error kinds should derive from ConfigError (exit 2) or
// IoError (exit 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: bad flags, malformed records, violated preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ConfigError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ConfigError("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Raised by metrics that need ground-truth relevance labels when the corpus
// carries none.
class MissingLabelsError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class EmptyCorpusError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DimensionMismatchError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Filesystem and cache-format failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// A failed embedding backend call. Retryable: the same request may succeed
// later. Carries the ids of the chunks whose batch failed.
class BackendError : public IoError {
 public:
  BackendError(const std::string& what, std::vector<std::string> chunk_ids)
      : IoError(what), chunk_ids_(std::move(chunk_ids)) {}

  const std::vector<std::string>& chunk_ids() const { return chunk_ids_; }
  bool retryable() const { return true; }

 private:
  std::vector<std::string> chunk_ids_;
};

// An answerability oracle failed while routing a query.
class OracleError : public Error {
 public:
  OracleError(const std::string& query_id, const std::string& what)
      : Error("oracle failed on query '" + query_id + "': " + what),
        query_id_(query_id) {}

  const std::string& query_id() const { return query_id_; }

 private:
  std::string query_id_;
};

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_ERRORS_H_
