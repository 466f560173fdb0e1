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

#include "adaptive_k/tokenizer.h"

#include <cstddef>

namespace adaptive_k {
namespace {

// Returns the byte length of the whitespace sequence starting at `pos`, or 0
// when the code point there is not whitespace.
std::size_t whitespace_length(std::string_view text, std::size_t pos) {
  const auto byte = [&](std::size_t i) -> unsigned char {
    return i < text.size() ? static_cast<unsigned char>(text[i]) : 0;
  };
  const unsigned char b0 = byte(pos);
  switch (b0) {
    case ' ': case '\t': case '\n': case '\v': case '\f': case '\r':
      return 1;
    default:
      break;
  }
  const unsigned char b1 = byte(pos + 1);
  const unsigned char b2 = byte(pos + 2);
  if (b0 == 0xC2 && (b1 == 0x85 || b1 == 0xA0)) return 2;  // NEL, NBSP
  if (b0 == 0xE1 && b1 == 0x9A && b2 == 0x80) return 3;    // U+1680
  if (b0 == 0xE2 && b1 == 0x80) {
    if (b2 >= 0x80 && b2 <= 0x8A) return 3;  // U+2000..U+200A
    if (b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF) return 3;
  }
  if (b0 == 0xE2 && b1 == 0x81 && b2 == 0x9F) return 3;  // U+205F
  if (b0 == 0xE3 && b1 == 0x80 && b2 == 0x80) return 3;  // U+3000
  return 0;
}

}  // namespace

std::int64_t WhitespaceTokenizer::count(std::string_view text) const {
  if (text.empty()) return 0;
  std::int64_t tokens = 0;
  bool in_token = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t ws = whitespace_length(text, pos);
    if (ws > 0) {
      in_token = false;
      pos += ws;
      continue;
    }
    if (!in_token) {
      ++tokens;
      in_token = true;
    }
    ++pos;
  }
  return tokens == 0 ? 1 : tokens;
}

}  // namespace adaptive_k
