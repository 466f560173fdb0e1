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

#ifndef ADAPTIVE_K_TOKENIZER_H_
#define ADAPTIVE_K_TOKENIZER_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace adaptive_k {

// Counts tokens in a piece of text. Every token budget in the library is
// expressed in units of the configured tokenizer, so swapping in a model
// tokenizer changes budgets consistently.
//
// Implementations must be deterministic and total: count(t) never throws on
// valid UTF-8 and returns 0 only when t is empty.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::int64_t count(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

// Splits on Unicode whitespace (ASCII space/tab/newline/etc., NEL, NBSP,
// U+1680, U+2000..U+200A, U+2028, U+2029, U+202F, U+205F, U+3000).
//
// Non-empty text consisting only of whitespace counts as one token so that
// a zero count always means empty text.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::int64_t count(std::string_view text) const override;
  std::string name() const override { return "whitespace"; }
};

// Convenience wrapper matching the free-function form used by callers that
// hold a tokenizer reference.
inline std::int64_t count_tokens(std::string_view text,
                                 const Tokenizer& tokenizer) {
  return tokenizer.count(text);
}

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_TOKENIZER_H_
