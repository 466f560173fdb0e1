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

#include "adaptive_k/metrics.h"

#include <cmath>
#include <random>

#include "adaptive_k/errors.h"
#include "doctest.h"
#include "test_util.h"

namespace adaptive_k {
namespace {

using testing::make_corpus;
using testing::profile_for;

Selection selection_of(std::vector<std::string> ids) {
  Selection sel;
  sel.selected_ids = std::move(ids);
  sel.cutoff_k = static_cast<std::int64_t>(sel.selected_ids.size()) - 1;
  return sel;
}

// Scores that rank chunk i at sorted position i.
std::vector<double> descending(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = 1.0 - 0.01 * static_cast<double>(i);
  return s;
}

std::vector<bool> relevant_at(std::size_t n, std::vector<std::size_t> positions) {
  std::vector<bool> r(n, false);
  for (const auto p : positions) r[p] = true;
  return r;
}

TEST_CASE("context recall") {
  // a=c0, b=c1, c=c2
  const Corpus corpus = make_corpus({1, 1, 1}, {true, false, true});
  CHECK(context_recall(selection_of({"c0", "c1"}), corpus) == 50.0);
  CHECK(context_recall(selection_of({"c0", "c1", "c2"}), corpus) == 100.0);
  CHECK(context_recall(selection_of({}), corpus) == 0.0);
  CHECK(context_recall(selection_of({"c2"}), corpus) == 50.0);

  const Corpus unlabeled = make_corpus({1, 1});
  CHECK_THROWS_AS(context_recall(selection_of({"c0"}), unlabeled),
                  MissingLabelsError);
  const Corpus none = make_corpus({1, 1}, {false, false});
  CHECK_THROWS_AS(context_recall(selection_of({"c0"}), none), MissingLabelsError);
}

TEST_CASE("true_k") {
  const Corpus first = make_corpus(std::vector<std::int64_t>(10, 1),
                                   relevant_at(10, {0}));
  CHECK(true_k(profile_for(first, descending(10)), first) == 0);

  const Corpus two = make_corpus(std::vector<std::int64_t>(10, 1),
                                 relevant_at(10, {2, 7}));
  CHECK(true_k(profile_for(two, descending(10)), two) == 7);

  const Corpus all = make_corpus({1, 1, 1, 1}, {true, true, true, true});
  CHECK(true_k(profile_for(all, {0.1, 0.4, 0.3, 0.2}), all) == 3);

  // Position is measured in the sorted ranking, not the corpus order.
  const Corpus shuffled = make_corpus({1, 1, 1}, {true, false, false});
  CHECK(true_k(profile_for(shuffled, {0.1, 0.9, 0.5}), shuffled) == 2);

  const Corpus unlabeled = make_corpus({1, 1});
  CHECK_THROWS_AS(true_k(profile_for(unlabeled, {0.2, 0.1}), unlabeled),
                  MissingLabelsError);
}

TEST_CASE("diff_k") {
  const Corpus corpus = make_corpus(std::vector<std::int64_t>(10, 1),
                                    relevant_at(10, {2, 7}));
  const auto profile = profile_for(corpus, descending(10));
  CHECK(diff_k(fixed_k_select(profile, corpus, 8), profile, corpus) == 0);
  CHECK(diff_k(fixed_k_select(profile, corpus, 3), profile, corpus) == 5);
  CHECK(diff_k(full_context_select(profile, corpus), profile, corpus) == 2);
  // Empty selection counts as effective k = -1.
  CHECK(diff_k(zero_shot_select(profile, corpus), profile, corpus) == 8);
}

TEST_CASE("token reduction") {
  CHECK(token_reduction(934, 110336) == doctest::Approx(99.1535).epsilon(1e-6));
  CHECK(std::abs(token_reduction(933.63, 110336.05) - 99.15) <= 0.15);
  CHECK(token_reduction(500, 500) == 0.0);
  CHECK(token_reduction(0, 500) == 100.0);
  CHECK(token_reduction(750, 500) == -50.0);
  CHECK_THROWS_AS(token_reduction(10, 0), ValidationError);
  CHECK_THROWS_AS(token_reduction(-1, 10), ValidationError);
}

TEST_CASE("answer normalization") {
  CHECK(normalize_answer("  The   Answer\tis\nParis. ") == "the answer is paris");
  CHECK(normalize_answer("\"Paris!\"") == "paris");
  CHECK(normalize_answer("...") == "");
  CHECK(normalize_answer("") == "");
  CHECK(normalize_answer("U.S.A.") == "u.s.a");
  CHECK(normalize_answer("ÉCOLE") == "École");  // ASCII-only casefold
}

TEST_CASE("subem") {
  const std::vector<std::string> paris = {"Paris"};
  CHECK(subem("The answer is Paris.", paris) == 1);
  CHECK(subem("paris", paris) == 1);
  CHECK(subem("Parisian", paris) == 1);
  CHECK(subem("London", paris) == 0);
  CHECK(subem("", paris) == 0);
  const std::vector<std::string> multi = {"New  York", "NYC"};
  CHECK(subem("it is new york city", multi) == 1);
  CHECK(subem("nyc!", multi) == 1);
  const std::vector<std::string> punct = {"?!"};
  CHECK(subem("anything", punct) == 0);
  CHECK_THROWS_AS(subem("x", std::vector<std::string>{}), ValidationError);
}

TEST_CASE("mean and population std") {
  const std::vector<double> v = {2, 4, 4, 4, 5, 5, 7, 9};
  const MeanStd m = mean_std(v);
  CHECK(m.mean == 5.0);
  CHECK(m.std == 2.0);
  CHECK(m.count == 8);
  CHECK(mean_std(std::vector<double>{}) == MeanStd{});
  CHECK(mean_std(std::vector<double>{3.5}) == MeanStd{3.5, 0.0, 1});
}

TEST_CASE("metric properties on random labeled profiles") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 80;
    std::vector<bool> rel(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      rel[i] = u(rng) < 0.3;
      any = any || rel[i];
    }
    if (!any) rel[rng() % n] = true;
    const Corpus corpus = make_corpus(std::vector<std::int64_t>(n, 3), rel);
    std::vector<double> scores(n);
    for (double& s : scores) s = u(rng);
    const auto profile = profile_for(corpus, scores);
    const std::int64_t tk = true_k(profile, corpus);

    const auto exact = fixed_k_select(profile, corpus, tk + 1);
    CHECK(context_recall(exact, corpus) == 100.0);
    CHECK(diff_k(exact, profile, corpus) == 0);
    if (tk > 0) CHECK(context_recall(fixed_k_select(profile, corpus, tk), corpus) < 100.0);

    double previous = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      const double r = context_recall(
          fixed_k_select(profile, corpus, static_cast<std::int64_t>(k)), corpus);
      CHECK(r >= previous);
      CHECK(r >= 0.0);
      CHECK(r <= 100.0);
      previous = r;
    }

    CHECK(diff_k(full_context_select(profile, corpus), profile, corpus) ==
          static_cast<std::int64_t>(n) - 1 - tk);
  }
}

}  // namespace
}  // namespace adaptive_k
