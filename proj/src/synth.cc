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

#include "adaptive_k/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "adaptive_k/errors.h"
#include "random.h"

namespace adaptive_k {
namespace {

using internal::Rng;

constexpr std::array<const char*, 16> kRelevantWords = {
    "revenue", "region", "quarter", "supplier", "shipment", "invoice",
    "total",   "count",  "order",   "product",  "customer", "record",
    "average", "year",   "store",   "category"};

constexpr std::array<const char*, 16> kFillerWords = {
    "the",    "river", "morning", "quiet",  "garden", "stone",
    "window", "cloud", "paper",   "forest", "music",  "bridge",
    "lamp",   "field", "coffee",  "sail"};

bool in_unit_interval(const SimRange& range) {
  return range.low >= -1.0 && range.high <= 1.0 && range.low <= range.high;
}

// Sizes summing exactly to `budget`, uniform in [lo, hi] except the last.
std::vector<std::int64_t> draw_sizes(Rng& rng, std::int64_t budget,
                                     std::int64_t mean) {
  const std::int64_t lo = std::max<std::int64_t>(1, mean - mean / 2);
  const std::int64_t hi = std::max(lo, mean + mean / 2);
  std::vector<std::int64_t> sizes;
  while (budget > 0) {
    const std::int64_t size = std::min(budget, rng.uniform_int(lo, hi));
    sizes.push_back(size);
    budget -= size;
  }
  return sizes;
}

std::string make_text(Rng& rng, std::int64_t tokens, bool relevant,
                      const std::string& tag) {
  std::string text;
  for (std::int64_t t = 0; t < tokens; ++t) {
    if (t > 0) text.push_back(' ');
    if (relevant && t == 0) {
      text += tag;
    } else if (relevant) {
      text += kRelevantWords[rng.next() % kRelevantWords.size()];
    } else {
      text += kFillerWords[rng.next() % kFillerWords.size()];
    }
  }
  return text;
}

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double sum = 0.0;
  do {
    sum = 0.0;
    for (double& x : v) {
      x = rng.uniform(-1.0, 1.0);
      sum += x * x;
    }
  } while (sum < 1e-12);
  const double norm = std::sqrt(sum);
  for (double& x : v) x /= norm;
  return v;
}

std::string pad(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.total_tokens < 1) throw ConfigError("synth: total tokens must be >= 1");
  if (spec.info_amount < 1 || spec.info_amount > spec.total_tokens) {
    throw ConfigError("synth: info amount " + std::to_string(spec.info_amount) +
                      " must lie in [1, total tokens = " +
                      std::to_string(spec.total_tokens) + "]");
  }
  if (spec.chunk_tokens_mean < 1) {
    throw ConfigError("synth: mean chunk size must be >= 1");
  }
  if (!in_unit_interval(spec.relevant_sim) ||
      !in_unit_interval(spec.irrelevant_sim)) {
    throw ConfigError(
        "synth: similarity ranges must satisfy -1 <= low <= high <= 1");
  }
  if (!(spec.noise_overlap >= 0.0 && spec.noise_overlap < 1.0)) {
    throw ConfigError("synth: noise overlap must lie in [0, 1)");
  }
  if (spec.noise_overlap == 0.0 &&
      !(spec.relevant_sim.low > spec.irrelevant_sim.high)) {
    throw ConfigError(
        "synth: with zero overlap the relevant range must lie strictly above "
        "the irrelevant range");
  }
}

SynthCase generate_synthetic(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed ^ 0x5eed5eed5eed5eedULL);

  const auto relevant_sizes =
      draw_sizes(rng, spec.info_amount, spec.chunk_tokens_mean);
  const auto irrelevant_sizes = draw_sizes(
      rng, spec.total_tokens - spec.info_amount, spec.chunk_tokens_mean);

  struct Draft {
    std::int64_t tokens;
    bool relevant;
    double score;
  };
  std::vector<Draft> drafts;
  drafts.reserve(relevant_sizes.size() + irrelevant_sizes.size());

  // Exactly round(overlap * n_relevant) relevant chunks get noise-range
  // scores; which ones is a seeded partial shuffle.
  const std::size_t n_relevant = relevant_sizes.size();
  const auto n_hidden = static_cast<std::size_t>(
      std::floor(spec.noise_overlap * static_cast<double>(n_relevant) + 0.5));
  std::vector<bool> hidden(n_relevant, false);
  {
    std::vector<std::size_t> idx(n_relevant);
    for (std::size_t i = 0; i < n_relevant; ++i) idx[i] = i;
    for (std::size_t i = 0; i < n_hidden; ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(
          static_cast<std::int64_t>(i), static_cast<std::int64_t>(n_relevant) - 1));
      std::swap(idx[i], idx[j]);
      hidden[idx[i]] = true;
    }
  }
  for (std::size_t i = 0; i < n_relevant; ++i) {
    const SimRange& range = hidden[i] ? spec.irrelevant_sim : spec.relevant_sim;
    drafts.push_back(
        {relevant_sizes[i], true, rng.uniform(range.low, range.high)});
  }
  for (const std::int64_t size : irrelevant_sizes) {
    drafts.push_back({size, false,
                      rng.uniform(spec.irrelevant_sim.low,
                                  spec.irrelevant_sim.high)});
  }

  for (std::size_t i = drafts.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(drafts[i - 1], drafts[j]);
  }

  const std::string tag = "fact-" + std::to_string(spec.seed);
  const std::size_t width = std::to_string(drafts.size()).size();
  std::vector<Chunk> chunks;
  chunks.reserve(drafts.size());
  SynthCase out;
  out.planted_scores.reserve(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    Chunk chunk;
    chunk.id = "c" + pad(i, width);
    chunk.text = make_text(rng, drafts[i].tokens, drafts[i].relevant, tag);
    chunk.token_count = drafts[i].tokens;
    chunk.relevant = drafts[i].relevant;
    chunks.push_back(std::move(chunk));
    out.planted_scores.push_back(drafts[i].score);
  }
  out.corpus = Corpus(std::move(chunks));
  out.query.id = "q" + std::to_string(spec.seed);
  out.query.text = "Aggregate every record tagged " + tag + ".";
  out.query.answers = {tag};
  return out;
}

SynthEmbeddings synthesize_embeddings(const SynthCase& synth, std::size_t dim,
                                      std::uint64_t seed) {
  if (dim < 2) throw ConfigError("synthetic embeddings need dim >= 2");
  Rng rng(seed ^ 0xe3bedde3bedde3beULL);
  const std::vector<double> direction = random_unit(rng, dim);

  std::vector<float> data;
  data.reserve(synth.corpus.size() * dim);
  for (const double target : synth.planted_scores) {
    std::vector<double> w;
    double norm = 0.0;
    while (norm < 1e-3) {
      w = random_unit(rng, dim);
      double along = 0.0;
      for (std::size_t j = 0; j < dim; ++j) along += w[j] * direction[j];
      double sum = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        w[j] -= along * direction[j];
        sum += w[j] * w[j];
      }
      norm = std::sqrt(sum);
    }
    const double t = std::clamp(target, -1.0, 1.0);
    const double ortho = std::sqrt(std::max(0.0, 1.0 - t * t));
    for (std::size_t j = 0; j < dim; ++j) {
      data.push_back(
          static_cast<float>(t * direction[j] + ortho * w[j] / norm));
    }
  }

  SynthEmbeddings out{
      EmbeddingMatrix("synthetic-d" + std::to_string(dim), dim,
                      synth.corpus.ids(), std::move(data)),
      {}};
  out.query.reserve(dim);
  for (const double x : direction) out.query.push_back(static_cast<float>(x));
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  Rng rng(seed ^ (index * 0xd6e8feb86659fd93ULL));
  return rng.next();
}

}  // namespace adaptive_k
