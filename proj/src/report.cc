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

#include "adaptive_k/report.h"

#include <cstdio>

#include "adaptive_k/errors.h"

namespace adaptive_k {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string fmt2(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

template <typename T>
ordered_json optional_json(const std::optional<T>& value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& node, const char* key) {
  const auto it = node.find(key);
  if (it == node.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

ordered_json mean_std_json(const MeanStd& v) {
  return {{"mean", v.mean}, {"std", v.std}, {"count", v.count}};
}

MeanStd mean_std_from(const json& node) {
  return {node.at("mean").get<double>(), node.at("std").get<double>(),
          node.at("count").get<std::size_t>()};
}

}  // namespace

ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  throw ConfigError("unknown report format '" + text + "' (expected csv, json)");
}

std::string report_to_csv(const EvalReport& report) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const EvalRow& row : report.rows) {
    const QueryMetrics& m = row.metrics;
    const bool ok = !row.error.has_value();
    out += csv_field(row.strategy) + ',' + csv_field(row.query_id) + ',';
    out += (m.context_recall ? fmt2(*m.context_recall) : "") + ',';
    out += (m.diff_k ? std::to_string(*m.diff_k) : "") + ',';
    out += (ok ? std::to_string(m.n_input_tokens) : "") + ',';
    out += (ok ? std::to_string(m.n_selected_chunks) : "") + ',';
    out += (m.reduction_pct ? fmt2(*m.reduction_pct) : "") + ',';
    out += m.subem ? std::to_string(*m.subem) : "";
    out += '\n';
  }
  return out;
}

ordered_json report_to_json(const EvalReport& report) {
  ordered_json rows = ordered_json::array();
  for (const EvalRow& row : report.rows) {
    const QueryMetrics& m = row.metrics;
    rows.push_back({{"strategy", row.strategy},
                    {"query_id", row.query_id},
                    {"recall", optional_json(m.context_recall)},
                    {"diff_k", optional_json(m.diff_k)},
                    {"true_k", optional_json(m.true_k)},
                    {"n_input_tokens", m.n_input_tokens},
                    {"n_chunks", m.n_selected_chunks},
                    {"reduction_pct", optional_json(m.reduction_pct)},
                    {"subem", optional_json(m.subem)},
                    {"cutoff_k", row.cutoff_k},
                    {"gap_index", optional_json(row.gap_index)},
                    {"error", optional_json(row.error)}});
  }
  ordered_json aggregates = ordered_json::array();
  for (const StrategyAggregate& agg : report.aggregates) {
    aggregates.push_back({{"strategy", agg.strategy},
                          {"rows", agg.rows},
                          {"errors", agg.errors},
                          {"recall", mean_std_json(agg.recall)},
                          {"diff_k", mean_std_json(agg.diff_k)},
                          {"n_input_tokens", mean_std_json(agg.n_input_tokens)},
                          {"n_chunks", mean_std_json(agg.n_chunks)},
                          {"reduction_pct", mean_std_json(agg.reduction_pct)},
                          {"subem", mean_std_json(agg.subem)}});
  }
  return {{"format", "adaptive-k-report"},
          {"version", 1},
          {"std_convention", "population"},
          {"config", ordered_json::parse(report.config.dump())},
          {"strategies", report.strategies},
          {"rows", std::move(rows)},
          {"aggregates", std::move(aggregates)}};
}

std::string report_to_json_string(const EvalReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

EvalReport report_from_json(const json& node) {
  EvalReport report;
  try {
    if (node.at("format").get<std::string>() != "adaptive-k-report") {
      throw ValidationError("not an adaptive-k report");
    }
    report.config = node.at("config");
    report.strategies = node.at("strategies").get<std::vector<std::string>>();
    for (const json& r : node.at("rows")) {
      EvalRow row;
      row.strategy = r.at("strategy").get<std::string>();
      row.query_id = r.at("query_id").get<std::string>();
      row.metrics.context_recall = optional_from<double>(r, "recall");
      row.metrics.diff_k = optional_from<std::int64_t>(r, "diff_k");
      row.metrics.true_k = optional_from<std::int64_t>(r, "true_k");
      row.metrics.n_input_tokens = r.at("n_input_tokens").get<std::int64_t>();
      row.metrics.n_selected_chunks = r.at("n_chunks").get<std::int64_t>();
      row.metrics.reduction_pct = optional_from<double>(r, "reduction_pct");
      row.metrics.subem = optional_from<int>(r, "subem");
      row.cutoff_k = r.at("cutoff_k").get<std::int64_t>();
      row.gap_index = optional_from<std::int64_t>(r, "gap_index");
      row.error = optional_from<std::string>(r, "error");
      report.rows.push_back(std::move(row));
    }
    for (const json& a : node.at("aggregates")) {
      StrategyAggregate agg;
      agg.strategy = a.at("strategy").get<std::string>();
      agg.rows = a.at("rows").get<std::size_t>();
      agg.errors = a.at("errors").get<std::size_t>();
      agg.recall = mean_std_from(a.at("recall"));
      agg.diff_k = mean_std_from(a.at("diff_k"));
      agg.n_input_tokens = mean_std_from(a.at("n_input_tokens"));
      agg.n_chunks = mean_std_from(a.at("n_chunks"));
      agg.reduction_pct = mean_std_from(a.at("reduction_pct"));
      agg.subem = mean_std_from(a.at("subem"));
      report.aggregates.push_back(std::move(agg));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return report;
}

void emit_report(const EvalReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
  write_file_atomic(path, format == ReportFormat::kCsv
                              ? report_to_csv(report)
                              : report_to_json_string(report));
}

}  // namespace adaptive_k
