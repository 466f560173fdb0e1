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

#include "adaptive_k/embedding_cache.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "adaptive_k/corpus.h"
#include "adaptive_k/errors.h"

namespace adaptive_k {
namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

void put_string16(std::string& out, const std::string& s, const char* what) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw ValidationError(std::string(what) + " longer than 65535 bytes");
  }
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T le() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i]))
               << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string string16() {
    const auto length = le<std::uint16_t>();
    need(length);
    std::string s = bytes_.substr(pos_, length);
    pos_ += length;
    return s;
  }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw IoError("embedding cache truncated at byte " +
                    std::to_string(pos_));
    }
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

CacheHeader decode_header(Reader& reader, std::size_t total_size) {
  if (total_size < 4) throw IoError("embedding cache too short for magic");
  char magic[4];
  for (char& c : magic) c = static_cast<char>(reader.le<std::uint8_t>());
  if (std::memcmp(magic, kCacheMagic, 4) != 0) {
    throw IoError("not an embedding cache (bad magic, expected 'AKEC')");
  }
  CacheHeader header;
  header.version = reader.le<std::uint16_t>();
  if (header.version != kCacheVersion) {
    throw IoError("unsupported embedding cache version " +
                  std::to_string(header.version));
  }
  header.dim = reader.le<std::uint32_t>();
  header.rows = reader.le<std::uint64_t>();
  header.model_name = reader.string16();
  return header;
}

}  // namespace

std::string encode_cache(const EmbeddingMatrix& matrix) {
  std::string out;
  out.reserve(32 + matrix.model_name().size() + matrix.rows() * 16 +
              matrix.data().size() * 4);
  out.append(kCacheMagic, 4);
  put_le<std::uint16_t>(out, kCacheVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
  put_le<std::uint64_t>(out, matrix.rows());
  put_string16(out, matrix.model_name(), "model name");
  for (const std::string& id : matrix.ids()) put_string16(out, id, "chunk id");
  for (const float x : matrix.data()) {
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  }
  return out;
}

EmbeddingMatrix decode_cache(const std::string& bytes) {
  Reader reader(bytes);
  const CacheHeader header = decode_header(reader, bytes.size());
  if (header.dim == 0) throw IoError("embedding cache has dimension 0");
  std::vector<std::string> ids;
  // Each manifest entry takes at least two bytes; reject absurd row counts
  // before reserving.
  if (header.rows > reader.remaining() / 2) {
    throw IoError("embedding cache truncated: row count exceeds file size");
  }
  ids.reserve(header.rows);
  for (std::uint64_t i = 0; i < header.rows; ++i) ids.push_back(reader.string16());
  const std::uint64_t floats = header.rows * header.dim;
  if (reader.remaining() != floats * 4) {
    throw IoError("embedding cache data section has " +
                  std::to_string(reader.remaining()) + " bytes, expected " +
                  std::to_string(floats * 4));
  }
  std::vector<float> data(floats);
  for (float& x : data) x = std::bit_cast<float>(reader.le<std::uint32_t>());
  try {
    return EmbeddingMatrix(header.model_name, header.dim, std::move(ids),
                           std::move(data));
  } catch (const Error& e) {
    throw IoError(std::string("corrupt embedding cache: ") + e.what());
  }
}

void write_cache(const EmbeddingMatrix& matrix,
                 const std::filesystem::path& path) {
  write_file_atomic(path, encode_cache(matrix));
}

EmbeddingMatrix read_cache(const std::filesystem::path& path) {
  try {
    return decode_cache(read_file(path));
  } catch (const IoError& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

CacheHeader read_cache_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  // Magic + version + dim + rows + name length, then the name itself.
  std::string bytes(4 + 2 + 4 + 8 + 2, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  bytes.resize(static_cast<std::size_t>(in.gcount()));
  if (bytes.size() == 20) {
    const std::size_t name_length =
        static_cast<unsigned char>(bytes[18]) |
        (static_cast<std::size_t>(static_cast<unsigned char>(bytes[19])) << 8);
    std::string name(name_length, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_length));
    name.resize(static_cast<std::size_t>(in.gcount()));
    bytes += name;
  }
  try {
    Reader reader(bytes);
    return decode_header(reader, bytes.size());
  } catch (const IoError& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace adaptive_k
