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

#include "adaptive_k/http_backend.h"

#include <cstdlib>
#include <thread>

#include "adaptive_k/errors.h"
#include "httplib.h"
#include "json.hpp"

namespace adaptive_k {
using nlohmann::json;

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const std::string& url = config_.url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("embedding URL must start with http:// or https://: '" +
                          url + "'");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ValidationError("unsupported URL scheme '" + scheme + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (scheme_host_port_.size() <= scheme_end + 3) {
    throw ValidationError("embedding URL has no host: '" + url + "'");
  }
  if (config_.model_name.empty()) config_.model_name = "http:" + url;
}

std::string HttpBackend::model_name() const { return config_.model_name; }

std::size_t HttpBackend::dim() const {
  if (config_.dim != 0) return config_.dim;
  std::call_once(probe_once_, [this] {
    const std::string probe[] = {"dimension probe"};
    const auto vectors = embed(probe);
    if (vectors.size() != 1 || vectors[0].empty()) {
      throw BackendError("dimension probe returned no vector", {});
    }
    probed_dim_ = vectors[0].size();
  });
  return probed_dim_;
}

std::vector<std::vector<float>> HttpBackend::embed(
    std::span<const std::string> texts) const {
  std::string last_error;
  for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.retry_backoff * attempt);
    try {
      return post_once(texts);
    } catch (const BackendError& e) {
      last_error = e.what();
    }
  }
  throw BackendError("embedding request to " + config_.url + " failed after " +
                         std::to_string(config_.max_retries + 1) +
                         " attempts: " + last_error,
                     {});
}

std::vector<std::vector<float>> HttpBackend::post_once(
    std::span<const std::string> texts) const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  httplib::Headers headers;
  if (!config_.token_env.empty()) {
    if (const char* token = std::getenv(config_.token_env.c_str());
        token != nullptr && *token != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  const json body = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto response =
      client.Post(path_, headers, body.dump(), "application/json");
  if (!response) {
    throw BackendError("transport error: " + httplib::to_string(response.error()),
                       {});
  }
  if (response->status != 200) {
    throw BackendError("HTTP status " + std::to_string(response->status), {});
  }

  std::vector<std::vector<float>> out;
  try {
    const json reply = json::parse(response->body);
    const json& embeddings = reply.at("embeddings");
    if (!embeddings.is_array()) throw BackendError("'embeddings' is not an array", {});
    out.reserve(embeddings.size());
    for (const json& row : embeddings) {
      std::vector<float> vec;
      vec.reserve(row.size());
      for (const json& x : row) vec.push_back(x.get<float>());
      out.push_back(std::move(vec));
    }
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed embedding response: ") + e.what(),
                       {});
  }
  if (out.size() != texts.size()) {
    throw BackendError("server returned " + std::to_string(out.size()) +
                           " embeddings for " + std::to_string(texts.size()) +
                           " texts",
                       {});
  }
  return out;
}

}  // namespace adaptive_k
