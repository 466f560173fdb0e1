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

#include "cli.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "adaptive_k/corpus.h"
#include "adaptive_k/embedder.h"
#include "adaptive_k/embedding_cache.h"
#include "adaptive_k/errors.h"
#include "adaptive_k/harness.h"
#include "adaptive_k/http_backend.h"
#include "adaptive_k/report.h"
#include "adaptive_k/selection.h"
#include "adaptive_k/similarity.h"
#include "adaptive_k/synth.h"
#include "json.hpp"

namespace adaptive_k::cli {
namespace {

using nlohmann::json;

struct BackendOptions {
  std::string kind = "mock";
  std::size_t dim = 64;
  std::string url;
  std::string model_name;
  std::string token_env = kDefaultTokenEnv;
  std::size_t batch_size = 32;
  std::size_t parallel = 1;
};

// Resolved configuration of an eval run. Everything that influences the
// report bytes is captured here; `jobs` and the output path are not.
struct RunConfig {
  std::string source = "files";  // "files" | "synthetic"
  std::uint64_t seed = 0;
  SynthSpec synth;
  std::size_t num_queries = 5;
  std::size_t synth_embed_dim = 0;
  std::string corpus;
  std::string queries;
  std::string scores;
  std::string cache;
  BackendOptions backend;
  std::vector<std::string> strategies;
  std::int64_t buffer = 5;
  double frac = 0.9;
  bool label_metrics = true;
  std::string predictions;
  std::string format = "json";
};

json backend_json(const BackendOptions& b) {
  return {{"kind", b.kind},         {"dim", b.dim},
          {"url", b.url},           {"model_name", b.model_name},
          {"token_env", b.token_env}, {"batch_size", b.batch_size},
          {"parallel", b.parallel}};
}

json synth_json(const SynthSpec& s) {
  return {{"total_tokens", s.total_tokens},
          {"info_amount", s.info_amount},
          {"chunk_tokens_mean", s.chunk_tokens_mean},
          {"relevant_sim", {s.relevant_sim.low, s.relevant_sim.high}},
          {"irrelevant_sim", {s.irrelevant_sim.low, s.irrelevant_sim.high}},
          {"noise_overlap", s.noise_overlap}};
}

json to_json(const RunConfig& c) {
  json j = {{"command", "eval"},
            {"source", c.source},
            {"seed", c.seed},
            {"strategies", c.strategies},
            {"label_metrics", c.label_metrics},
            {"predictions", c.predictions},
            {"format", c.format}};
  if (c.source == "synthetic") {
    j["synth"] = synth_json(c.synth);
    j["num_queries"] = c.num_queries;
    j["synth_embed_dim"] = c.synth_embed_dim;
  } else {
    j["corpus"] = c.corpus;
    j["queries"] = c.queries;
    j["scores"] = c.scores;
    j["cache"] = c.cache;
    j["backend"] = backend_json(c.backend);
  }
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    if (j.at("command").get<std::string>() != "eval") {
      throw ConfigError("config snapshot is not from an eval run");
    }
    c.source = j.at("source").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.strategies = j.at("strategies").get<std::vector<std::string>>();
    c.label_metrics = j.at("label_metrics").get<bool>();
    c.predictions = j.at("predictions").get<std::string>();
    c.format = j.at("format").get<std::string>();
    if (c.source == "synthetic") {
      const json& s = j.at("synth");
      c.synth.total_tokens = s.at("total_tokens").get<std::int64_t>();
      c.synth.info_amount = s.at("info_amount").get<std::int64_t>();
      c.synth.chunk_tokens_mean = s.at("chunk_tokens_mean").get<std::int64_t>();
      c.synth.relevant_sim = {s.at("relevant_sim").at(0).get<double>(),
                              s.at("relevant_sim").at(1).get<double>()};
      c.synth.irrelevant_sim = {s.at("irrelevant_sim").at(0).get<double>(),
                                s.at("irrelevant_sim").at(1).get<double>()};
      c.synth.noise_overlap = s.at("noise_overlap").get<double>();
      c.num_queries = j.at("num_queries").get<std::size_t>();
      c.synth_embed_dim = j.at("synth_embed_dim").get<std::size_t>();
    } else {
      c.corpus = j.at("corpus").get<std::string>();
      c.queries = j.at("queries").get<std::string>();
      c.scores = j.at("scores").get<std::string>();
      c.cache = j.at("cache").get<std::string>();
      const json& b = j.at("backend");
      c.backend.kind = b.at("kind").get<std::string>();
      c.backend.dim = b.at("dim").get<std::size_t>();
      c.backend.url = b.at("url").get<std::string>();
      c.backend.model_name = b.at("model_name").get<std::string>();
      c.backend.token_env = b.at("token_env").get<std::string>();
      c.backend.batch_size = b.at("batch_size").get<std::size_t>();
      c.backend.parallel = b.at("parallel").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config snapshot: ") + e.what());
  }
  return c;
}

std::unique_ptr<EmbeddingBackend> make_backend(const BackendOptions& options,
                                               std::uint64_t seed) {
  if (options.kind == "mock") {
    return std::make_unique<MockBackend>(options.dim, seed);
  }
  if (options.kind == "http") {
    if (options.url.empty()) throw ConfigError("--backend http needs --url");
    HttpBackendConfig config;
    config.url = options.url;
    config.model_name = options.model_name;
    config.token_env = options.token_env;
    // For http, --dim only pins the dimension when given explicitly.
    config.dim = options.dim;
    return std::make_unique<HttpBackend>(config);
  }
  throw ConfigError("unknown backend '" + options.kind +
                    "' (expected mock, http)");
}

EmbedOptions embed_options(const BackendOptions& options) {
  return {options.batch_size, options.parallel};
}

void add_backend_flags(CLI::App& cmd, BackendOptions& b) {
  cmd.add_option("--backend", b.kind, "Embedding backend: mock | http")
      ->capture_default_str();
  cmd.add_option("--dim", b.dim,
                 "Embedding dimension (mock; http: 0 = probe the server)")
      ->capture_default_str();
  cmd.add_option("--url", b.url, "HTTP embedding endpoint");
  cmd.add_option("--model-name", b.model_name,
                 "Model name recorded in the cache (http)");
  cmd.add_option("--token-env", b.token_env,
                 "Environment variable holding the bearer token")
      ->capture_default_str();
  cmd.add_option("--batch-size", b.batch_size, "Texts per backend request")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--parallel", b.parallel, "Concurrent backend requests")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

SimRange parse_range(const std::string& text, const char* flag) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const std::string lo = text.substr(0, comma);
    const std::string hi = text.substr(comma + 1);
    SimRange range;
    range.low = std::stod(lo, &used);
    if (used != lo.size()) throw std::invalid_argument(lo);
    range.high = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument(hi);
    return range;
  } catch (const std::exception&) {
    throw ConfigError(std::string(flag) + " expects <low>,<high>, got '" + text +
                      "'");
  }
}

struct SynthFlags {
  SynthSpec spec;
  std::string relevant_sim = "0.55,0.85";
  std::string irrelevant_sim = "0.05,0.45";

  SynthSpec resolve(std::uint64_t seed) const {
    SynthSpec out = spec;
    out.seed = seed;
    out.relevant_sim = parse_range(relevant_sim, "--relevant-sim");
    out.irrelevant_sim = parse_range(irrelevant_sim, "--irrelevant-sim");
    validate(out);
    return out;
  }
};

void add_synth_flags(CLI::App& cmd, SynthFlags& f, const std::string& prefix) {
  cmd.add_option("--" + prefix + "total", f.spec.total_tokens,
                 "Total context tokens")
      ->capture_default_str();
  cmd.add_option("--" + prefix + "info", f.spec.info_amount,
                 "Tokens of relevant information")
      ->capture_default_str();
  cmd.add_option("--" + prefix + "chunk-tokens", f.spec.chunk_tokens_mean,
                 "Mean chunk size in tokens")
      ->capture_default_str();
  cmd.add_option("--" + prefix + "overlap", f.spec.noise_overlap,
                 "Fraction of relevant chunks scored in the irrelevant range")
      ->capture_default_str();
  cmd.add_option("--" + prefix + "relevant-sim", f.relevant_sim,
                 "Planted similarity range of relevant chunks, low,high")
      ->capture_default_str();
  cmd.add_option("--" + prefix + "irrelevant-sim", f.irrelevant_sim,
                 "Planted similarity range of irrelevant chunks, low,high")
      ->capture_default_str();
}

// Scores file: one JSON object per line,
//   {"query_id": "...", "scores": {"<chunk id>": <float>, ...}}
void write_scores(const std::filesystem::path& path, const Query& query,
                  const Corpus& corpus, const std::vector<double>& scores) {
  json record = {{"query_id", query.id}, {"scores", json::object()}};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    record["scores"][corpus[i].id] = scores[i];
  }
  write_file_atomic(path, record.dump() + "\n");
}

// query id -> scores in corpus order.
std::map<std::string, std::vector<double>> load_scores(
    const std::filesystem::path& path, const Corpus& corpus) {
  std::map<std::string, std::vector<double>> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json record = json::parse(line);
      const auto query_id = record.at("query_id").get<std::string>();
      const json& scores = record.at("scores");
      std::vector<double> ordered(corpus.size());
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto it = scores.find(corpus[i].id);
        if (it == scores.end()) {
          throw ParseError(line_number, "no score for chunk '" + corpus[i].id +
                                            "'");
        }
        ordered[i] = it->get<double>();
      }
      out[query_id] = std::move(ordered);
    } catch (const json::exception& e) {
      throw ParseError(line_number, std::string("bad scores record: ") + e.what());
    }
  }
  return out;
}

std::map<std::string, std::string> load_predictions(
    const std::filesystem::path& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json record = json::parse(line);
      out[record.at("id").get<std::string>()] =
          record.at("prediction").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(line_number,
                       std::string("bad prediction record: ") + e.what());
    }
  }
  return out;
}

// Expands bare "adaptive" with the --buffer/--frac defaults and returns the
// canonical strategy list. Rejects duplicates.
std::vector<StrategySpec> resolve_strategies(
    const std::vector<std::string>& texts, std::int64_t buffer, double frac) {
  std::vector<StrategySpec> specs;
  for (const std::string& text : texts) {
    StrategySpec spec = parse_strategy(text);
    if (text == "adaptive") {
      spec.adaptive.buffer = buffer;
      spec.adaptive.search_fraction = frac;
      validate(spec.adaptive);
    }
    for (const StrategySpec& prior : specs) {
      if (prior == spec) {
        throw ConfigError("strategy '" + spec.to_string() + "' listed twice");
      }
    }
    specs.push_back(spec);
  }
  return specs;
}

// ---------------------------------------------------------------------------

int cmd_synth(const SynthSpec& spec, const std::string& corpus_path,
              const std::string& queries_path, const std::string& scores_path,
              std::ostream& out) {
  const SynthCase synth = generate_synthetic(spec);
  write_corpus(synth.corpus, corpus_path);
  write_queries({synth.query}, queries_path);
  if (!scores_path.empty()) {
    write_scores(scores_path, synth.query, synth.corpus, synth.planted_scores);
  }
  std::int64_t relevant_tokens = 0;
  for (const Chunk& chunk : synth.corpus.chunks()) {
    if (chunk.relevant.value_or(false)) relevant_tokens += chunk.token_count;
  }
  out << "wrote " << synth.corpus.size() << " chunks ("
      << synth.corpus.relevant_count() << " relevant, " << relevant_tokens
      << " of " << synth.corpus.total_tokens() << " tokens) to " << corpus_path
      << "\n";
  return kExitOk;
}

int cmd_embed(const std::string& corpus_path, const std::string& cache_path,
              const BackendOptions& backend_options, std::uint64_t seed,
              std::ostream& out) {
  const WhitespaceTokenizer tokenizer;
  const Corpus corpus = ingest_corpus(corpus_path, tokenizer);
  const auto backend = make_backend(backend_options, seed);
  EmbedStats stats;
  const EmbeddingMatrix matrix = embed_corpus(
      corpus, *backend, cache_path, embed_options(backend_options), &stats);
  if (stats.cache_hit) {
    out << "cache hit: " << matrix.rows() << " rows already in " << cache_path
        << "\n";
  } else {
    out << "embedded " << stats.embedded << " chunks (" << stats.reused
        << " reused), dim " << matrix.dim() << ", wrote " << cache_path << "\n";
  }
  return kExitOk;
}

struct RetrieveArgs {
  std::string corpus;
  std::string cache;
  std::string scores;
  std::string queries;
  std::string query_id;
  std::string query_text;
  std::string strategy = "adaptive";
  std::int64_t buffer = 5;
  double frac = 0.9;
  std::string oracle;
  BackendOptions backend;
};

int cmd_retrieve(const RetrieveArgs& args, std::uint64_t seed,
                 std::ostream& out) {
  const WhitespaceTokenizer tokenizer;
  const Corpus corpus = ingest_corpus(args.corpus, tokenizer);
  const StrategySpec spec =
      resolve_strategies({args.strategy}, args.buffer, args.frac).front();

  Query query;
  if (!args.query_text.empty()) {
    query.id = args.query_id.empty() ? "query" : args.query_id;
    query.text = args.query_text;
  } else if (!args.queries.empty()) {
    const auto queries = ingest_queries(args.queries);
    if (queries.empty()) throw ConfigError("query file is empty");
    if (args.query_id.empty()) {
      query = queries.front();
    } else {
      const auto it = std::find_if(
          queries.begin(), queries.end(),
          [&](const Query& q) { return q.id == args.query_id; });
      if (it == queries.end()) {
        throw ConfigError("no query with id '" + args.query_id + "'");
      }
      query = *it;
    }
  } else if (args.scores.empty()) {
    throw ConfigError("give --query-text or --queries");
  }

  std::vector<double> raw;
  if (!args.scores.empty()) {
    auto scores = load_scores(args.scores, corpus);
    if (query.id.empty()) {
      if (scores.size() != 1) {
        throw ConfigError("scores file holds several queries; pick one with "
                          "--queries/--query-id");
      }
      query.id = scores.begin()->first;
    }
    const auto it = scores.find(query.id);
    if (it == scores.end()) {
      throw ConfigError("no scores for query '" + query.id + "'");
    }
    raw = std::move(it->second);
  } else {
    if (args.cache.empty()) throw ConfigError("give --cache or --scores");
    const auto backend = make_backend(args.backend, seed);
    const EmbeddingMatrix matrix = embed_corpus(
        corpus, *backend, args.cache, embed_options(args.backend));
    raw = cosine_scores(embed_query(query, *backend), matrix);
  }

  const auto ids = corpus.ids();
  const SimilarityProfile profile = build_profile(std::move(raw), ids);
  std::shared_ptr<const AnswerabilityOracle> oracle;
  if (spec.strategy == Strategy::kSelfRoute) oracle = make_oracle(spec.oracle);
  const Selection selection = select(spec, profile, corpus, query, oracle.get());

  for (std::size_t r = 0; r < selection.selected_ids.size(); ++r) {
    const std::string& id = selection.selected_ids[r];
    json line = {{"rank", r},
                 {"id", id},
                 {"score", profile.sorted_scores[r]},
                 {"tokens", corpus.at(id).token_count},
                 {"strategy", selection.label},
                 {"cutoff_k", selection.cutoff_k}};
    if (selection.gap_index) {
      line["gap_index"] = *selection.gap_index;
      line["gap_value"] = *selection.gap_value;
    }
    out << line.dump() << "\n";
  }
  return kExitOk;
}

EvalReport execute_eval(const RunConfig& config, std::size_t jobs) {
  const std::vector<StrategySpec> strategies =
      resolve_strategies(config.strategies, config.buffer, config.frac);
  if (strategies.empty()) throw ConfigError("no strategies given");

  EvalOptions options;
  options.jobs = jobs;
  options.label_metrics = config.label_metrics;
  if (!config.predictions.empty()) {
    options.predictions = load_predictions(config.predictions);
  }

  std::vector<EvalCase> cases;
  std::unique_ptr<EmbeddingBackend> backend;
  std::optional<EmbeddingMatrix> matrix;
  if (config.source == "synthetic") {
    SynthSpec spec = config.synth;
    spec.seed = config.seed;
    validate(spec);
    cases = synthetic_cases(spec, config.num_queries, config.synth_embed_dim);
  } else {
    if (config.corpus.empty() || config.queries.empty()) {
      throw ConfigError("eval needs --corpus and --queries, or --synth");
    }
    const WhitespaceTokenizer tokenizer;
    auto corpus = std::make_shared<const Corpus>(
        ingest_corpus(config.corpus, tokenizer));
    const auto queries = ingest_queries(config.queries);
    std::map<std::string, std::vector<double>> scores;
    if (!config.scores.empty()) {
      scores = load_scores(config.scores, *corpus);
    } else {
      backend = make_backend(config.backend, config.seed);
      matrix = config.cache.empty()
                   ? embed_corpus(*corpus, *backend, embed_options(config.backend))
                   : embed_corpus(*corpus, *backend, config.cache,
                                  embed_options(config.backend));
      options.backend = backend.get();
      options.matrix = &*matrix;
    }
    for (const Query& query : queries) {
      EvalCase c;
      c.query = query;
      c.corpus = corpus;
      if (!config.scores.empty()) {
        const auto it = scores.find(query.id);
        if (it != scores.end()) c.planted_scores = it->second;
        // Queries without scores surface as error rows.
        else c.planted_scores = std::vector<double>{};
      }
      cases.push_back(std::move(c));
    }
  }

  if (config.label_metrics) {
    for (const EvalCase& c : cases) {
      if (c.corpus->relevant_count() == 0) {
        throw MissingLabelsError(
            "corpus for query '" + c.query.id +
            "' has no chunk labeled relevant; recall and diff-k need labels "
            "(pass --no-label-metrics to skip them)");
      }
    }
  }

  EvalReport report = run_eval(cases, strategies, options);
  report.config = to_json(config);
  return report;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Adaptive-k retrieval: largest-gap context selection and "
               "evaluation"};
  app.name(args.empty() ? "adaptive-k" : args.front());
  app.require_subcommand(1);
  std::uint64_t seed = 0;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  SynthFlags synth_flags;
  std::string synth_corpus, synth_queries, synth_scores;
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  add_synth_flags(*synth, synth_flags, "");
  synth->add_option("--out-corpus", synth_corpus, "Corpus output")->required();
  synth->add_option("--out-queries", synth_queries, "Query output")->required();
  synth->add_option("--out-scores", synth_scores, "Planted scores output");

  // embed
  auto* embed = app.add_subcommand("embed", "Embed a corpus into a cache");
  std::string embed_corpus_path, embed_cache;
  BackendOptions embed_backend;
  embed->add_option("--corpus", embed_corpus_path, "Corpus file")->required();
  embed->add_option("--cache", embed_cache, "Cache file")->required();
  embed->add_option("--seed", seed, "Random seed (mock backend)")
      ->capture_default_str();
  add_backend_flags(*embed, embed_backend);

  // retrieve
  auto* retrieve = app.add_subcommand("retrieve", "Select context for a query");
  RetrieveArgs rargs;
  retrieve->add_option("--corpus", rargs.corpus, "Corpus file")->required();
  retrieve->add_option("--cache", rargs.cache, "Embedding cache");
  retrieve->add_option("--scores", rargs.scores, "Planted scores file");
  retrieve->add_option("--queries", rargs.queries, "Query file");
  retrieve->add_option("--query-id", rargs.query_id, "Query to run");
  retrieve->add_option("--query-text", rargs.query_text, "Inline query text");
  retrieve->add_option("--strategy", rargs.strategy, "Selection strategy")
      ->capture_default_str();
  retrieve->add_option("--buffer", rargs.buffer, "Buffer B for bare 'adaptive'")
      ->capture_default_str();
  retrieve->add_option("--frac", rargs.frac,
                       "Search fraction for bare 'adaptive'")
      ->capture_default_str();
  retrieve->add_option("--seed", seed, "Random seed (mock backend)")
      ->capture_default_str();
  add_backend_flags(*retrieve, rargs.backend);

  // eval
  auto* eval = app.add_subcommand("eval", "Run a strategy sweep");
  RunConfig config;
  SynthFlags eval_synth;
  bool use_synth = false;
  bool no_labels = false;
  std::size_t jobs = 1;
  std::string out_path, replay, format;
  config.strategies = {"adaptive",       "fixedtok:1000",  "fixedtok:5000",
                       "fixedtok:10000", "fixedtok:25000", "fixedtok:50000",
                       "full",           "zeroshot",       "selfroute"};
  eval->add_flag("--synth", use_synth,
                 "Evaluate on generated synthetic corpora (one per query)");
  add_synth_flags(*eval, eval_synth, "synth-");
  eval->add_option("--num-queries", config.num_queries,
                   "Synthetic queries (each with its own corpus)")
      ->capture_default_str();
  eval->add_option("--synth-embed-dim", config.synth_embed_dim,
                   "Route synthetic scores through embeddings of this dim "
                   "(0 = planted scores)")
      ->capture_default_str();
  eval->add_option("--corpus", config.corpus, "Corpus file");
  eval->add_option("--queries", config.queries, "Query file");
  eval->add_option("--scores", config.scores, "Planted scores file");
  eval->add_option("--cache", config.cache, "Embedding cache");
  add_backend_flags(*eval, config.backend);
  eval->add_option("--strategy", config.strategies,
                   "Strategy (repeatable)")
      ->capture_default_str();
  eval->add_option("--buffer", config.buffer, "Buffer B for bare 'adaptive'")
      ->capture_default_str();
  eval->add_option("--frac", config.frac, "Search fraction for bare 'adaptive'")
      ->capture_default_str();
  eval->add_option("--predictions", config.predictions,
                   "Reader predictions (JSON lines with id, prediction)");
  eval->add_flag("--no-label-metrics", no_labels,
                 "Skip recall and diff-k (corpus without labels)");
  eval->add_option("--seed", seed, "Random seed")->capture_default_str();
  eval->add_option("--jobs", jobs, "Parallel queries")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  eval->add_option("--out", out_path, "Report file")->required();
  eval->add_option("--format", format, "csv | json (default: from extension)");
  eval->add_option("--replay", replay,
                   "Re-run the configuration snapshot of a JSON report");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth->parsed()) {
      return cmd_synth(synth_flags.resolve(seed), synth_corpus, synth_queries,
                       synth_scores, out);
    }
    if (embed->parsed()) {
      return cmd_embed(embed_corpus_path, embed_cache, embed_backend, seed, out);
    }
    if (retrieve->parsed()) return cmd_retrieve(rargs, seed, out);

    if (!replay.empty()) {
      const json snapshot = json::parse(read_file(replay), nullptr, false);
      if (snapshot.is_discarded() || !snapshot.contains("config")) {
        throw ConfigError("'" + replay + "' is not a JSON report");
      }
      config = config_from_json(snapshot.at("config"));
    } else {
      config.seed = seed;
      config.label_metrics = !no_labels;
      if (use_synth) {
        config.source = "synthetic";
        config.synth = eval_synth.resolve(seed);
      }
      std::vector<std::string> canonical;
      for (const auto& spec :
           resolve_strategies(config.strategies, config.buffer, config.frac)) {
        canonical.push_back(spec.to_string());
      }
      config.strategies = canonical;
      if (!format.empty()) {
        config.format = format;
      } else {
        config.format =
            std::filesystem::path(out_path).extension() == ".csv" ? "csv"
                                                                  : "json";
      }
    }
    const ReportFormat report_format = parse_report_format(config.format);
    const EvalReport report = execute_eval(config, jobs);
    emit_report(report, report_format, out_path);
    out << format_summary(report);
    out << "wrote " << report.rows.size() << " rows to " << out_path << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace adaptive_k::cli
