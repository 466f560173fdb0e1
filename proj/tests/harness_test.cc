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
#include <cmath>
#include <fstream>
#include <sstream>

#include "adaptive_k/errors.h"
#include "adaptive_k/report.h"
#include "adaptive_k/similarity.h"
#include "adaptive_k/tokenizer.h"
#include "doctest.h"
#include "test_util.h"

namespace adaptive_k {
namespace {

std::vector<StrategySpec> specs(std::initializer_list<const char*> texts) {
  std::vector<StrategySpec> out;
  for (const char* t : texts) out.push_back(parse_strategy(t));
  return out;
}

SynthSpec small_spec(std::uint64_t seed = 1) {
  SynthSpec spec;
  spec.total_tokens = 10000;
  spec.info_amount = 1000;
  spec.chunk_tokens_mean = 50;
  spec.seed = seed;
  return spec;
}

TEST_CASE("synthetic corpus has exact token budgets") {
  const SynthCase c = generate_synthetic(small_spec());
  const Corpus& corpus = c.corpus;
  std::int64_t rel_tokens = 0;
  std::size_t rel_chunks = 0;
  for (const Chunk& chunk : corpus.chunks()) {
    REQUIRE(chunk.relevant.has_value());
    CHECK(chunk.token_count >= 1);
    CHECK(chunk.token_count <= 75);
    CHECK(count_tokens(chunk.text, WhitespaceTokenizer{}) == chunk.token_count);
    if (*chunk.relevant) {
      rel_tokens += chunk.token_count;
      ++rel_chunks;
    }
  }
  CHECK(rel_tokens == 1000);
  CHECK(corpus.total_tokens() == 10000);
  CHECK(rel_chunks >= 14);
  CHECK(rel_chunks <= 28);
  CHECK(corpus.size() >= 140);
  CHECK(corpus.size() <= 280);
  CHECK(c.planted_scores.size() == corpus.size());
  CHECK(c.query.id == "q1");
  CHECK(c.query.answers == std::vector<std::string>{"fact-1"});

  // Planted scores separate cleanly: every relevant score beats every
  // irrelevant one and both respect their ranges.
  double min_rel = 1.0, max_irr = -1.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const double s = c.planted_scores[i];
    if (*corpus[i].relevant) {
      CHECK(s >= 0.55);
      CHECK(s <= 0.85);
      min_rel = std::min(min_rel, s);
    } else {
      CHECK(s >= 0.05);
      CHECK(s <= 0.45);
      max_irr = std::max(max_irr, s);
    }
  }
  CHECK(min_rel > max_irr);
}

TEST_CASE("synthetic generation is deterministic in the seed") {
  const SynthCase a = generate_synthetic(small_spec(7));
  const SynthCase b = generate_synthetic(small_spec(7));
  const SynthCase c = generate_synthetic(small_spec(8));
  CHECK(a.corpus.chunks() == b.corpus.chunks());
  CHECK(a.planted_scores == b.planted_scores);
  CHECK(a.query == b.query);
  CHECK(a.planted_scores != c.planted_scores);
}

TEST_CASE("noise overlap hides an exact number of relevant chunks") {
  SynthSpec spec = small_spec(3);
  spec.noise_overlap = 0.25;
  const SynthCase c = generate_synthetic(spec);
  std::size_t relevant = 0, hidden = 0;
  for (std::size_t i = 0; i < c.corpus.size(); ++i) {
    if (!*c.corpus[i].relevant) continue;
    ++relevant;
    if (c.planted_scores[i] <= 0.45) ++hidden;
  }
  CHECK(hidden == static_cast<std::size_t>(std::floor(0.25 * relevant + 0.5)));
}

TEST_CASE("infeasible specs are rejected") {
  auto bad = [](auto mutate) {
    SynthSpec spec = small_spec();
    mutate(spec);
    CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  };
  bad([](SynthSpec& s) { s.info_amount = 20000; });
  bad([](SynthSpec& s) { s.info_amount = 0; });
  bad([](SynthSpec& s) { s.chunk_tokens_mean = 0; });
  bad([](SynthSpec& s) { s.relevant_sim = {0.5, 1.5}; });
  bad([](SynthSpec& s) { s.relevant_sim = {0.8, 0.6}; });
  bad([](SynthSpec& s) { s.relevant_sim = {0.4, 0.8}; });  // overlaps at 0
  bad([](SynthSpec& s) { s.noise_overlap = 1.0; });
  bad([](SynthSpec& s) { s.noise_overlap = -0.1; });
  SynthSpec ok = small_spec();
  ok.relevant_sim = {0.4, 0.8};
  ok.noise_overlap = 0.1;
  CHECK_NOTHROW(generate_synthetic(ok));
}

TEST_CASE("adaptive recovers planted relevance without overlap") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SynthCase c = generate_synthetic(small_spec(seed));
    const auto profile = build_profile(c.planted_scores, c.corpus.ids());
    const Selection sel = adaptive_k_select(profile, c.corpus);
    CHECK(context_recall(sel, c.corpus) == 100.0);
    const std::int64_t tk = true_k(profile, c.corpus);
    CHECK(*sel.gap_index == tk);
    CHECK(sel.cutoff_k >= tk);
    CHECK(sel.cutoff_k <= tk + 5);
  }
}

TEST_CASE("adaptive context grows with the information amount") {
  double previous = -1.0;
  for (const std::int64_t info : {5000, 10000, 25000, 50000}) {
    SynthSpec spec;
    spec.info_amount = info;
    const auto cases = synthetic_cases(spec, 5);
    const auto report = run_eval(cases, specs({"adaptive"}));
    const double mean_tokens = report.aggregates.at(0).n_input_tokens.mean;
    CHECK(mean_tokens > previous);
    CHECK(report.aggregates.at(0).recall.mean == 100.0);
    previous = mean_tokens;
  }
}

TEST_CASE("full and zero-shot rows") {
  const auto cases = synthetic_cases(small_spec(), 4);
  const auto report = run_eval(cases, specs({"full", "zeroshot"}));
  REQUIRE(report.rows.size() == 8);
  for (const EvalRow& row : report.rows) {
    CHECK_FALSE(row.error.has_value());
    if (row.strategy == "full") {
      CHECK(*row.metrics.context_recall == 100.0);
      CHECK(*row.metrics.reduction_pct == 0.0);
      CHECK(row.metrics.n_input_tokens == 10000);
    } else {
      CHECK(row.strategy == "zeroshot");
      CHECK(*row.metrics.context_recall == 0.0);
      CHECK(row.metrics.n_input_tokens == 0);
      CHECK(*row.metrics.reduction_pct == 100.0);
    }
  }
  // Strategy list order, then query id.
  CHECK(report.rows.front().strategy == "full");
  CHECK(report.rows.back().strategy == "zeroshot");
  CHECK(std::is_sorted(report.rows.begin(), report.rows.begin() + 4,
                       [](const EvalRow& a, const EvalRow& b) {
                         return a.query_id < b.query_id;
                       }));
}

TEST_CASE("bigger token budgets never lose recall") {
  SynthSpec spec;
  spec.info_amount = 50000;
  const auto report =
      run_eval(synthetic_cases(spec, 6), specs({"fixedtok:1000", "fixedtok:5000"}));
  std::map<std::string, double> small;
  for (const auto& row : report.rows) {
    if (row.strategy == "fixedtok:1000") small[row.query_id] = *row.metrics.context_recall;
  }
  for (const auto& row : report.rows) {
    if (row.strategy == "fixedtok:5000") {
      CHECK(*row.metrics.context_recall >= small.at(row.query_id));
    }
  }
}

TEST_CASE("per-query failures become error rows") {
  auto cases = synthetic_cases(small_spec(), 3);
  // A planted vector of the wrong length fails just that query.
  cases[1].planted_scores->pop_back();
  const auto report = run_eval(cases, specs({"adaptive", "full"}));
  REQUIRE(report.rows.size() == 6);
  std::size_t errors = 0;
  for (const auto& row : report.rows) {
    if (row.error) {
      ++errors;
      CHECK(row.query_id == cases[1].query.id);
    }
  }
  CHECK(errors == 2);
  CHECK(report.aggregates.at(0).errors == 1);
  CHECK(report.aggregates.at(0).recall.count == 2);
  CHECK(aggregates_consistent(report));
}

TEST_CASE("missing labels fail per query") {
  Corpus unlabeled = testing::make_corpus({5, 5, 5});
  EvalCase c{{"q", "text", {}},
             std::make_shared<const Corpus>(unlabeled),
             std::vector<double>{0.3, 0.2, 0.1}, nullptr, std::nullopt};
  const auto report = run_eval({c}, specs({"full"}));
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].error.has_value());

  EvalOptions no_labels;
  no_labels.label_metrics = false;
  const auto ok = run_eval({c}, specs({"full"}), no_labels);
  CHECK_FALSE(ok.rows[0].error.has_value());
  CHECK_FALSE(ok.rows[0].metrics.context_recall.has_value());
  CHECK(ok.rows[0].metrics.n_input_tokens == 15);
}

TEST_CASE("predictions are scored with SubEM") {
  auto cases = synthetic_cases(small_spec(), 2);
  EvalOptions options;
  options.predictions[cases[0].query.id] =
      "It is " + cases[0].query.answers.at(0) + ".";
  options.predictions[cases[1].query.id] = "unknown";
  const auto report = run_eval(cases, specs({"full"}), options);
  CHECK(report.aggregates.at(0).subem.count == 2);
  CHECK(report.aggregates.at(0).subem.mean == doctest::Approx(0.5));
}

TEST_CASE("results do not depend on the number of jobs") {
  SynthSpec spec;
  spec.noise_overlap = 0.1;
  const auto cases = synthetic_cases(spec, 8);
  const auto strategies =
      specs({"adaptive", "fixedtok:5000", "full", "zeroshot", "selfroute"});
  const auto one = run_eval(cases, strategies);
  EvalOptions parallel;
  parallel.jobs = 4;
  const auto four = run_eval(cases, strategies, parallel);
  CHECK(report_to_json_string(one) == report_to_json_string(four));
}

TEST_CASE("embedding mode reproduces planted behavior") {
  SynthSpec spec = small_spec(11);
  const auto planted = synthetic_cases(spec, 3);
  const auto embedded = synthetic_cases(spec, 3, 32);
  for (std::size_t q = 0; q < 3; ++q) {
    REQUIRE(embedded[q].matrix != nullptr);
    REQUIRE(embedded[q].query_vector.has_value());
    const auto scores = cosine_scores(*embedded[q].query_vector, *embedded[q].matrix);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      CHECK(scores[i] == doctest::Approx((*planted[q].planted_scores)[i]).epsilon(1e-5));
    }
  }
  const auto a = run_eval(planted, specs({"adaptive"}));
  const auto b = run_eval(embedded, specs({"adaptive"}));
  CHECK(a.aggregates.at(0).recall.mean == b.aggregates.at(0).recall.mean);
}

TEST_CASE("synthesize_embeddings rejects tiny dimensions") {
  const SynthCase c = generate_synthetic(small_spec());
  CHECK_THROWS_AS(synthesize_embeddings(c, 1, 0), ConfigError);
}

TEST_CASE("csv report") {
  EvalReport empty;
  CHECK(report_to_csv(empty) == std::string(kCsvHeader) + "\n");

  const auto report = run_eval(synthetic_cases(small_spec(), 2),
                               specs({"adaptive:B=2,frac=0.5", "zeroshot"}));
  std::istringstream in(report_to_csv(report));
  std::string line;
  std::getline(in, line);
  CHECK(line == kCsvHeader);
  std::getline(in, line);
  // Labels containing commas are quoted.
  CHECK(line.rfind("\"adaptive:B=2,frac=0.5\",q", 0) == 0);
  std::size_t lines = 1;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 4);
}

TEST_CASE("json report round-trips") {
  SynthSpec spec;
  spec.noise_overlap = 0.1;
  auto report = run_eval(synthetic_cases(spec, 3),
                         specs({"adaptive", "fixedtok:5000", "full"}));
  report.config["seed"] = 3;
  const auto json = report_to_json(report);
  CHECK(json["std_convention"] == "population");
  const EvalReport back = report_from_json(nlohmann::json::parse(json.dump()));
  CHECK(back.aggregates == report.aggregates);
  CHECK(back.strategies == report.strategies);
  CHECK(back.config == report.config);
  CHECK(aggregates_consistent(back));
  CHECK(report_to_json_string(back) == report_to_json_string(report));

  EvalReport tampered = back;
  tampered.aggregates.at(0).recall.mean += 1.0;
  CHECK_FALSE(aggregates_consistent(tampered));

  CHECK_THROWS_AS(report_from_json(nlohmann::json::object()), ValidationError);
  CHECK_THROWS_AS(report_from_json(nlohmann::json::parse(R"({"format":"x"})")),
                  ValidationError);
}

TEST_CASE("emit_report writes files") {
  testing::TempDir dir;
  const auto report = run_eval(synthetic_cases(small_spec(), 1), specs({"full"}));
  emit_report(report, ReportFormat::kJson, dir / "r.json");
  emit_report(report, ReportFormat::kCsv, dir / "r.csv");
  CHECK(read_file(dir / "r.json") == report_to_json_string(report));
  CHECK(read_file(dir / "r.csv") == report_to_csv(report));
  CHECK(parse_report_format("csv") == ReportFormat::kCsv);
  CHECK_THROWS_AS(parse_report_format("xml"), ConfigError);
  CHECK_THROWS_AS(emit_report(report, ReportFormat::kCsv, dir / "no" / "such" / "r.csv"),
                  IoError);
}

}  // namespace
}  // namespace adaptive_k
