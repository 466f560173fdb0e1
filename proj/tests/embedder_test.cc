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

#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "adaptive_k/embedding_cache.h"
#include "adaptive_k/errors.h"
#include "adaptive_k/http_backend.h"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "test_util.h"

namespace adaptive_k {
namespace {

using testing::TempDir;

Corpus three_chunks() {
  return Corpus({{"a", "alpha text", 2, true},
                 {"b", "beta text", 2, false},
                 {"c", "gamma text", 2, false}});
}

std::vector<std::uint32_t> bits(const std::vector<float>& v) {
  std::vector<std::uint32_t> out;
  for (const float x : v) out.push_back(std::bit_cast<std::uint32_t>(x));
  return out;
}

double l2(const std::vector<float>& v) {
  double sum = 0.0;
  for (const float x : v) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

// Fails every call.
class BrokenBackend final : public EmbeddingBackend {
 public:
  std::vector<std::vector<float>> embed(
      std::span<const std::string>) const override {
    throw std::runtime_error("connection refused");
  }
  std::string model_name() const override { return "broken"; }
  std::size_t dim() const override { return 4; }
};

// Returns vectors of the wrong length.
class ShortBackend final : public EmbeddingBackend {
 public:
  std::vector<std::vector<float>> embed(
      std::span<const std::string> texts) const override {
    return std::vector<std::vector<float>>(texts.size(), {1.0f, 0.0f});
  }
  std::string model_name() const override { return "short"; }
  std::size_t dim() const override { return 4; }
};

TEST_CASE("mock_embed matches frozen cross-platform bits") {
  // Computed by an independent Python port of FNV-1a + SplitMix64.
  CHECK(bits(mock_embed("hello", 4, 1)) ==
        std::vector<std::uint32_t>{0xbe112e89, 0x3ec47439, 0x3f676a22,
                                   0xbdff2c05});
  CHECK(bits(mock_embed("", 3, 0)) ==
        std::vector<std::uint32_t>{0x3efb042e, 0xbf5023ac, 0xbea0c505});
}

TEST_CASE("mock_embed is deterministic and unit norm") {
  for (const std::size_t dim : {1u, 2u, 7u, 64u, 384u}) {
    const auto first = mock_embed("some text", dim, 42);
    CHECK(first.size() == dim);
    CHECK(bits(first) == bits(mock_embed("some text", dim, 42)));
    CHECK(std::fabs(l2(first) - 1.0) <= 1e-6);
  }
  CHECK_THROWS_AS(mock_embed("x", 0, 1), ValidationError);
}

TEST_CASE("mock_embed differs across seeds") {
  int collisions = 0;
  for (std::uint64_t pair = 0; pair < 100; ++pair) {
    const std::string text = "text " + std::to_string(pair);
    if (bits(mock_embed(text, 16, pair)) == bits(mock_embed(text, 16, pair + 1000))) {
      ++collisions;
    }
  }
  CHECK(collisions == 0);
}

TEST_CASE("embed_corpus shape and alignment") {
  const Corpus corpus = three_chunks();
  const MockBackend backend(8, 3);
  const EmbeddingMatrix matrix = embed_corpus(corpus, backend);
  CHECK(matrix.rows() == 3);
  CHECK(matrix.dim() == 8);
  CHECK(matrix.ids() == corpus.ids());
  for (std::size_t i = 0; i < 3; ++i) {
    const auto row = matrix.row(i);
    CHECK(bits({row.begin(), row.end()}) ==
          bits(mock_embed(corpus[i].text, 8, 3)));
    CHECK(std::fabs(matrix.norms()[i] - 1.0) <= 1e-6);
  }
}

TEST_CASE("second embed_corpus call is a cache hit with zero backend calls") {
  TempDir dir;
  const Corpus corpus = three_chunks();
  const MockBackend backend(8, 3);
  EmbedStats stats;
  const auto first = embed_corpus(corpus, backend, dir / "cache.akec", {}, &stats);
  CHECK_FALSE(stats.cache_hit);
  CHECK(stats.embedded == 3);
  const std::size_t calls_after_first = backend.calls();
  CHECK(calls_after_first >= 1);

  const auto second = embed_corpus(corpus, backend, dir / "cache.akec", {}, &stats);
  CHECK(stats.cache_hit);
  CHECK(backend.calls() == calls_after_first);
  CHECK(second == first);
}

TEST_CASE("partial cache hit embeds only missing chunks") {
  TempDir dir;
  const MockBackend backend(8, 3);
  embed_corpus(Corpus({{"a", "alpha", 1, {}}}), backend, dir / "cache.akec");
  const std::size_t before = backend.texts_embedded();
  EmbedStats stats;
  const auto matrix = embed_corpus(three_chunks(), backend, dir / "cache.akec",
                                   {}, &stats);
  CHECK(stats.reused == 1);
  CHECK(stats.embedded == 2);
  CHECK(backend.texts_embedded() - before == 2);
  CHECK(matrix.ids() == three_chunks().ids());
  CHECK(read_cache(dir / "cache.akec").rows() == 3);
}

TEST_CASE("cache written at dim 8 read by dim 16 backend fails") {
  TempDir dir;
  const Corpus corpus = three_chunks();
  embed_corpus(corpus, MockBackend(8, 1), dir / "cache.akec");
  CHECK_THROWS_AS(embed_corpus(corpus, MockBackend(16, 1), dir / "cache.akec"),
                  DimensionMismatchError);
}

TEST_CASE("cache from another model is rejected") {
  TempDir dir;
  const Corpus corpus = three_chunks();
  embed_corpus(corpus, MockBackend(8, 1), dir / "cache.akec");
  CHECK_THROWS_AS(embed_corpus(corpus, MockBackend(8, 2), dir / "cache.akec"),
                  ValidationError);
}

TEST_CASE("cache round-trip is bitwise identical") {
  TempDir dir;
  std::vector<float> data = {1.0f, -0.0f, 3.5e-38f, 1e30f, -2.25f, 0.1f};
  const EmbeddingMatrix matrix("model-\xC3\xA9", 3, {"x", "\xE2\x82\xAC"}, data);
  write_cache(matrix, dir / "m.akec");
  const EmbeddingMatrix back = read_cache(dir / "m.akec");
  CHECK(back == matrix);
  CHECK(bits(back.data()) == bits(data));
  const CacheHeader header = read_cache_header(dir / "m.akec");
  CHECK(header.version == kCacheVersion);
  CHECK(header.dim == 3);
  CHECK(header.rows == 2);
  CHECK(header.model_name == "model-\xC3\xA9");
}

TEST_CASE("cache byte layout") {
  const EmbeddingMatrix matrix("m", 1, {"id"}, {1.0f});
  const std::string bytes = encode_cache(matrix);
  const std::string expected =
      std::string("AKEC") + std::string("\x01\x00", 2) +
      std::string("\x01\x00\x00\x00", 4) +
      std::string("\x01\x00\x00\x00\x00\x00\x00\x00", 8) +
      std::string("\x01\x00", 2) + "m" + std::string("\x02\x00", 2) + "id" +
      std::string("\x00\x00\x80\x3f", 4);
  CHECK(bytes == expected);
}

TEST_CASE("corrupt caches fail clearly") {
  const EmbeddingMatrix matrix("m", 2, {"a", "b"}, {1, 0, 0, 1});
  std::string bytes = encode_cache(matrix);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_WITH_AS(decode_cache(bad_magic), doctest::Contains("bad magic"),
                       IoError);

  std::string bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(decode_cache(bad_version), IoError);

  for (std::size_t cut : {std::size_t{2}, std::size_t{12}, bytes.size() - 1}) {
    CHECK_THROWS_AS(decode_cache(bytes.substr(0, cut)), IoError);
  }
  CHECK_THROWS_AS(decode_cache(bytes + "x"), IoError);

  // Zero-norm row.
  const std::string zero = encode_cache(EmbeddingMatrix("m", 1, {"a"}, {1.0f}));
  std::string zeroed = zero;
  zeroed.replace(zeroed.size() - 4, 4, std::string(4, '\0'));
  CHECK_THROWS_AS(decode_cache(zeroed), IoError);
}

TEST_CASE("EmbeddingMatrix invariants") {
  CHECK_THROWS_AS(EmbeddingMatrix("m", 0, {}, {}), DimensionMismatchError);
  CHECK_THROWS_AS(EmbeddingMatrix("m", 2, {"a"}, {1.0f}), DimensionMismatchError);
  CHECK_THROWS_AS(EmbeddingMatrix("m", 1, {"a"}, {0.0f}), ValidationError);
  CHECK_THROWS_AS(EmbeddingMatrix("m", 1, {"a", "a"}, {1.0f, 1.0f}),
                  ValidationError);
  const EmbeddingMatrix m("m", 2, {"a", "b"}, {3, 4, 0, 2});
  CHECK(m.norms()[0] == doctest::Approx(5.0));
  const std::vector<std::string> order = {"b", "a"};
  const EmbeddingMatrix swapped = m.select(order);
  CHECK(swapped.row(0)[1] == 2.0f);
  const std::vector<std::string> missing = {"zz"};
  CHECK_THROWS_AS(m.select(missing), ValidationError);
}

TEST_CASE("embed_query") {
  const MockBackend backend(12, 5);
  CHECK_THROWS_AS(embed_query({"q", "", {}}, backend), ValidationError);
  const auto a = embed_query({"q", "what is up", {}}, backend);
  const auto b = embed_query({"q", "what is up", {}}, backend);
  CHECK(a.size() == backend.dim());
  CHECK(bits(a) == bits(b));
}

TEST_CASE("backend failure carries chunk ids") {
  const Corpus corpus = three_chunks();
  try {
    embed_corpus(corpus, BrokenBackend{}, EmbedOptions{2, 1});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.retryable());
    CHECK(e.chunk_ids() == std::vector<std::string>{"a", "b"});
  }
  CHECK_THROWS_AS(embed_corpus(corpus, ShortBackend{}), DimensionMismatchError);
}

TEST_CASE("empty chunk text cannot be embedded") {
  const Corpus corpus({{"a", "", 0, {}}});
  CHECK_THROWS_AS(embed_corpus(corpus, MockBackend(4, 0)), ValidationError);
}

TEST_CASE("parallel batches reassemble in input order") {
  std::vector<Chunk> chunks;
  for (int i = 0; i < 37; ++i) {
    chunks.push_back({"id" + std::to_string(i), "text " + std::to_string(i), 2, {}});
  }
  const Corpus corpus(chunks);
  const MockBackend backend(6, 9);
  const auto serial = embed_corpus(corpus, backend, EmbedOptions{1, 1});
  const auto parallel = embed_corpus(corpus, backend, EmbedOptions{4, 3});
  CHECK(parallel == serial);
}

// --- HTTP backend against a local server ------------------------------------

class LocalEmbeddingServer {
 public:
  explicit LocalEmbeddingServer(std::size_t dim) : dim_(dim) {
    server_.Post("/embed", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      ++requests_;
      last_auth_ = req.get_header_value("Authorization");
      if (fail_next_ > 0) {
        --fail_next_;
        res.status = 503;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json out = {{"embeddings", nlohmann::json::array()}};
      for (const auto& text : body.at("texts")) {
        out["embeddings"].push_back(mock_embed(text.get<std::string>(), dim_, 77));
      }
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalEmbeddingServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/embed";
  }
  std::atomic<int> requests_{0};
  std::atomic<int> fail_next_{0};
  std::string last_auth_;

 private:
  std::size_t dim_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST_CASE("http backend speaks the JSON protocol") {
  LocalEmbeddingServer server(6);
  ::setenv("ADAPTIVE_K_TEST_TOKEN", "s3cret", 1);
  HttpBackendConfig config;
  config.url = server.url();
  config.token_env = "ADAPTIVE_K_TEST_TOKEN";
  config.retry_backoff = std::chrono::milliseconds(1);
  const HttpBackend backend(config);

  CHECK(backend.dim() == 6);  // probed
  CHECK(backend.model_name() == "http:" + server.url());
  const std::vector<std::string> texts = {"one", "two"};
  const auto vectors = backend.embed(texts);
  REQUIRE(vectors.size() == 2);
  CHECK(bits(vectors[1]) == bits(mock_embed("two", 6, 77)));
  CHECK(server.last_auth_ == "Bearer s3cret");

  server.fail_next_ = 1;
  CHECK(backend.embed(texts).size() == 2);  // retried

  TempDir dir;
  const auto matrix = embed_corpus(three_chunks(), backend, dir / "h.akec",
                                   EmbedOptions{2, 2});
  CHECK(matrix.rows() == 3);
  CHECK(read_cache_header(dir / "h.akec").model_name == backend.model_name());
  ::unsetenv("ADAPTIVE_K_TEST_TOKEN");
}

TEST_CASE("http backend failures become BackendError") {
  LocalEmbeddingServer server(4);
  HttpBackendConfig config;
  config.url = server.url();
  config.dim = 4;
  config.max_retries = 1;
  config.retry_backoff = std::chrono::milliseconds(1);
  const HttpBackend backend(config);
  server.fail_next_ = 5;
  try {
    embed_corpus(three_chunks(), backend, EmbedOptions{32, 1});
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.chunk_ids().size() == 3);
    CHECK(std::string(e.what()).find("503") != std::string::npos);
  }
  CHECK(server.requests_ == 2);

  HttpBackendConfig unreachable;
  unreachable.url = "http://127.0.0.1:1/embed";
  unreachable.dim = 4;
  unreachable.max_retries = 0;
  CHECK_THROWS_AS(HttpBackend(unreachable).embed(std::vector<std::string>{"x"}),
                  BackendError);
  CHECK_THROWS_AS(HttpBackend({.url = "ftp://x"}), ValidationError);
  CHECK_THROWS_AS(HttpBackend({.url = "no-scheme"}), ValidationError);
}

}  // namespace
}  // namespace adaptive_k
