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

#include "adaptive_k/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "adaptive_k/errors.h"
#include "adaptive_k/similarity.h"

namespace adaptive_k {
namespace {

// Serializes calls into an oracle that is not declared thread-safe.
class LockedOracle final : public AnswerabilityOracle {
 public:
  explicit LockedOracle(std::shared_ptr<const AnswerabilityOracle> inner)
      : inner_(std::move(inner)) {}

  bool can_answer(const Query& query,
                  std::span<const Chunk* const> chunks) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    return inner_->can_answer(query, chunks);
  }
  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<const AnswerabilityOracle> inner_;
  mutable std::mutex mutex_;
};

std::vector<double> case_scores(const EvalCase& c, const EvalOptions& options) {
  if (c.planted_scores) return *c.planted_scores;
  const EmbeddingMatrix* matrix = c.matrix ? c.matrix.get() : options.matrix;
  if (matrix == nullptr) {
    throw ConfigError("query '" + c.query.id +
                      "': no planted scores and no embeddings");
  }
  std::vector<float> query_vector;
  if (c.query_vector) {
    query_vector = *c.query_vector;
  } else if (options.backend != nullptr) {
    query_vector = embed_query(c.query, *options.backend);
  } else {
    throw ConfigError("query '" + c.query.id +
                      "': no query vector and no embedding backend");
  }
  const auto ids = c.corpus->ids();
  if (matrix->ids() == ids) return cosine_scores(query_vector, *matrix);
  return cosine_scores(query_vector, matrix->select(ids));
}

std::vector<EvalRow> evaluate_case(
    const EvalCase& c, const std::vector<StrategySpec>& strategies,
    const std::vector<std::string>& labels,
    const std::vector<const AnswerabilityOracle*>& oracles,
    const EvalOptions& options) {
  std::vector<EvalRow> rows(strategies.size());
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    rows[s].strategy = labels[s];
    rows[s].query_id = c.query.id;
  }

  SimilarityProfile profile;
  std::optional<std::int64_t> truth;
  try {
    if (!c.corpus) throw ConfigError("query '" + c.query.id + "' has no corpus");
    const auto ids = c.corpus->ids();
    profile = build_profile(case_scores(c, options), ids);
    if (options.label_metrics) truth = true_k(profile, *c.corpus);
  } catch (const std::exception& e) {
    for (EvalRow& row : rows) row.error = e.what();
    return rows;
  }

  const auto prediction = options.predictions.find(c.query.id);
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    EvalRow& row = rows[s];
    try {
      const Selection selection =
          select(strategies[s], profile, *c.corpus, c.query, oracles[s]);
      QueryMetrics& m = row.metrics;
      m.n_input_tokens = selection.selected_tokens;
      m.n_selected_chunks = static_cast<std::int64_t>(selection.selected_ids.size());
      if (c.corpus->total_tokens() > 0) {
        m.reduction_pct = token_reduction(
            static_cast<double>(selection.selected_tokens),
            static_cast<double>(c.corpus->total_tokens()));
      }
      if (truth) {
        m.true_k = *truth;
        m.context_recall = context_recall(selection, *c.corpus);
        m.diff_k = diff_k(selection, profile, *c.corpus);
      }
      if (prediction != options.predictions.end() && !c.query.answers.empty()) {
        m.subem = subem(prediction->second, c.query.answers);
      }
      row.cutoff_k = selection.cutoff_k;
      row.gap_index = selection.gap_index;
    } catch (const std::exception& e) {
      row.metrics = QueryMetrics{};
      row.error = e.what();
    }
  }
  return rows;
}

bool close(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

bool close(const MeanStd& a, const MeanStd& b) {
  return a.count == b.count && close(a.mean, b.mean) && close(a.std, b.std);
}

std::string fmt2(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

}  // namespace

EvalReport run_eval(const std::vector<EvalCase>& cases,
                    const std::vector<StrategySpec>& strategies,
                    const EvalOptions& options) {
  EvalReport report;
  std::vector<std::string> labels;
  std::vector<std::shared_ptr<const AnswerabilityOracle>> owned;
  std::vector<const AnswerabilityOracle*> oracles;
  for (const StrategySpec& spec : strategies) {
    labels.push_back(spec.to_string());
    const AnswerabilityOracle* oracle = nullptr;
    if (spec.strategy == Strategy::kSelfRoute) {
      const auto it = options.oracles.find(spec.oracle);
      std::shared_ptr<const AnswerabilityOracle> base =
          it != options.oracles.end() ? it->second : make_oracle(spec.oracle);
      if (!base->thread_safe() && options.jobs > 1) {
        base = std::make_shared<LockedOracle>(std::move(base));
      }
      owned.push_back(base);
      oracle = base.get();
    }
    oracles.push_back(oracle);
  }
  report.strategies = labels;

  std::vector<std::vector<EvalRow>> per_case(cases.size());
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1,
                                                   std::max<std::size_t>(1, cases.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      per_case[i] = evaluate_case(cases[i], strategies, labels, oracles, options);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < cases.size(); i = next++) {
          per_case[i] =
              evaluate_case(cases[i], strategies, labels, oracles, options);
        }
      });
    }
    for (std::thread& worker : workers) worker.join();
  }

  for (std::size_t s = 0; s < strategies.size(); ++s) {
    std::vector<EvalRow> group;
    group.reserve(cases.size());
    for (auto& rows : per_case) group.push_back(std::move(rows[s]));
    std::stable_sort(group.begin(), group.end(),
                     [](const EvalRow& a, const EvalRow& b) {
                       return a.query_id < b.query_id;
                     });
    for (EvalRow& row : group) report.rows.push_back(std::move(row));
  }
  report.aggregates = aggregate(report.rows, report.strategies);
  return report;
}

std::vector<StrategyAggregate> aggregate(
    const std::vector<EvalRow>& rows,
    const std::vector<std::string>& strategies) {
  std::vector<StrategyAggregate> out;
  for (const std::string& strategy : strategies) {
    StrategyAggregate agg;
    agg.strategy = strategy;
    std::vector<double> recall, diff, tokens, chunks, reduction, sub;
    for (const EvalRow& row : rows) {
      if (row.strategy != strategy) continue;
      ++agg.rows;
      if (row.error) {
        ++agg.errors;
        continue;
      }
      const QueryMetrics& m = row.metrics;
      if (m.context_recall) recall.push_back(*m.context_recall);
      if (m.diff_k) diff.push_back(static_cast<double>(*m.diff_k));
      tokens.push_back(static_cast<double>(m.n_input_tokens));
      chunks.push_back(static_cast<double>(m.n_selected_chunks));
      if (m.reduction_pct) reduction.push_back(*m.reduction_pct);
      if (m.subem) sub.push_back(*m.subem);
    }
    agg.recall = mean_std(recall);
    agg.diff_k = mean_std(diff);
    agg.n_input_tokens = mean_std(tokens);
    agg.n_chunks = mean_std(chunks);
    agg.reduction_pct = mean_std(reduction);
    agg.subem = mean_std(sub);
    out.push_back(std::move(agg));
  }
  return out;
}

bool aggregates_consistent(const EvalReport& report) {
  const auto fresh = aggregate(report.rows, report.strategies);
  if (fresh.size() != report.aggregates.size()) return false;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    const auto& a = fresh[i];
    const auto& b = report.aggregates[i];
    if (a.strategy != b.strategy || a.rows != b.rows || a.errors != b.errors ||
        !close(a.recall, b.recall) || !close(a.diff_k, b.diff_k) ||
        !close(a.n_input_tokens, b.n_input_tokens) ||
        !close(a.n_chunks, b.n_chunks) ||
        !close(a.reduction_pct, b.reduction_pct) || !close(a.subem, b.subem)) {
      return false;
    }
  }
  return true;
}

std::vector<EvalCase> synthetic_cases_with_seeds(
    const SynthSpec& base, const std::vector<std::uint64_t>& seeds,
    std::size_t embed_dim) {
  std::vector<EvalCase> cases;
  cases.reserve(seeds.size());
  for (const std::uint64_t seed : seeds) {
    SynthSpec spec = base;
    spec.seed = seed;
    SynthCase synth = generate_synthetic(spec);
    EvalCase c;
    c.query = synth.query;
    if (embed_dim > 0) {
      SynthEmbeddings emb = synthesize_embeddings(synth, embed_dim, seed);
      c.matrix = std::make_shared<const EmbeddingMatrix>(std::move(emb.matrix));
      c.query_vector = std::move(emb.query);
    } else {
      c.planted_scores = std::move(synth.planted_scores);
    }
    c.corpus = std::make_shared<const Corpus>(std::move(synth.corpus));
    cases.push_back(std::move(c));
  }
  return cases;
}

std::vector<EvalCase> synthetic_cases(const SynthSpec& base,
                                      std::size_t n_queries,
                                      std::size_t embed_dim) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(n_queries);
  for (std::size_t i = 0; i < n_queries; ++i) {
    seeds.push_back(derive_seed(base.seed, i));
  }
  return synthetic_cases_with_seeds(base, seeds, embed_dim);
}

std::string format_summary(const EvalReport& report) {
  const auto cell = [](const MeanStd& v) {
    return v.count == 0 ? std::string("-") : fmt2(v.mean) + " ± " + fmt2(v.std);
  };
  std::size_t width = 8;
  for (const auto& agg : report.aggregates) {
    width = std::max(width, agg.strategy.size());
  }
  std::string out;
  const auto line = [&](const std::string& strategy,
                        const std::vector<std::string>& cells) {
    std::string row = strategy + std::string(width - strategy.size() + 2, ' ');
    for (const std::string& c : cells) {
      row += c;
      if (c.size() < 22) row += std::string(22 - c.size(), ' ');
    }
    while (!row.empty() && row.back() == ' ') row.pop_back();
    out += row + '\n';
  };
  line("strategy", {"recall", "diff_k", "n_input_tokens", "reduction_pct",
                    "errors"});
  for (const auto& agg : report.aggregates) {
    line(agg.strategy,
         {cell(agg.recall), cell(agg.diff_k), cell(agg.n_input_tokens),
          cell(agg.reduction_pct),
          std::to_string(agg.errors) + "/" + std::to_string(agg.rows)});
  }
  return out;
}

}  // namespace adaptive_k
