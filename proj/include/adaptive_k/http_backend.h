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

#ifndef ADAPTIVE_K_HTTP_BACKEND_H_
#define ADAPTIVE_K_HTTP_BACKEND_H_

#include <chrono>
#include <cstddef>
#include <mutex>
#include <optional>
#include <string>

#include "adaptive_k/embedder.h"

namespace adaptive_k {

inline constexpr char kDefaultTokenEnv[] = "ADAPTIVE_K_EMBED_TOKEN";

struct HttpBackendConfig {
  // Full endpoint, e.g. "http://localhost:8080/embed". https requires the
  // library to be built with OpenSSL.
  std::string url;
  // Name recorded in cache headers. Defaults to "http:<url>".
  std::string model_name;
  // 0 means "discover with a probe request on first use".
  std::size_t dim = 0;
  // Environment variable holding the bearer token. Unset or empty variable
  // means no Authorization header.
  std::string token_env = kDefaultTokenEnv;
  std::size_t max_retries = 2;
  std::chrono::milliseconds retry_backoff{200};
  std::chrono::seconds timeout{60};
};

// Speaks the JSON embedding protocol:
//   POST <url>  {"texts": ["...", ...]}
//   200         {"embeddings": [[f, ...], ...]}
// Any transport error, non-200 status, or malformed body becomes a
// BackendError after the configured retries.
class HttpBackend final : public EmbeddingBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  std::vector<std::vector<float>> embed(
      std::span<const std::string> texts) const override;
  std::string model_name() const override;
  std::size_t dim() const override;

 private:
  std::vector<std::vector<float>> post_once(
      std::span<const std::string> texts) const;

  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  mutable std::once_flag probe_once_;
  mutable std::size_t probed_dim_ = 0;
};

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_HTTP_BACKEND_H_
