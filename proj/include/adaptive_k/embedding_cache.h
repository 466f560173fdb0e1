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

#ifndef ADAPTIVE_K_EMBEDDING_CACHE_H_
#define ADAPTIVE_K_EMBEDDING_CACHE_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "adaptive_k/embedder.h"

namespace adaptive_k {

// Binary cache layout, all integers little-endian:
//
//   "AKEC"                     4 bytes magic
//   version                    u16 (currently 1)
//   dim                        u32
//   rows                       u64
//   model name                 u16 length + UTF-8 bytes
//   manifest, per row          u16 length + UTF-8 id bytes
//   data                       rows * dim float32, row-major
inline constexpr char kCacheMagic[4] = {'A', 'K', 'E', 'C'};
inline constexpr std::uint16_t kCacheVersion = 1;

std::string encode_cache(const EmbeddingMatrix& matrix);
// Throws IoError on bad magic, unsupported version, or truncation.
EmbeddingMatrix decode_cache(const std::string& bytes);

// Atomic write via temporary file + rename.
void write_cache(const EmbeddingMatrix& matrix,
                 const std::filesystem::path& path);
EmbeddingMatrix read_cache(const std::filesystem::path& path);

struct CacheHeader {
  std::uint16_t version = 0;
  std::uint32_t dim = 0;
  std::uint64_t rows = 0;
  std::string model_name;
};
CacheHeader read_cache_header(const std::filesystem::path& path);

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_EMBEDDING_CACHE_H_
