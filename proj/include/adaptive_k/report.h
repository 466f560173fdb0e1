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

#ifndef ADAPTIVE_K_REPORT_H_
#define ADAPTIVE_K_REPORT_H_

#include <filesystem>
#include <string>

#include "adaptive_k/harness.h"

namespace adaptive_k {

enum class ReportFormat { kCsv, kJson };

// "csv" or "json"; throws ConfigError otherwise.
ReportFormat parse_report_format(const std::string& text);

// Fixed header; floats printed with two decimals, absent values empty.
inline constexpr char kCsvHeader[] =
    "strategy,query_id,recall,diff_k,n_input_tokens,n_chunks,reduction_pct,"
    "subem";

std::string report_to_csv(const EvalReport& report);

// Full-precision JSON with the config snapshot, rows, and aggregates.
// Key order is fixed, so equal reports serialize to identical bytes.
nlohmann::ordered_json report_to_json(const EvalReport& report);
std::string report_to_json_string(const EvalReport& report);

// Inverse of report_to_json. Throws ValidationError on schema violations.
EvalReport report_from_json(const nlohmann::json& json);

void emit_report(const EvalReport& report, ReportFormat format,
                 const std::filesystem::path& path);

}  // namespace adaptive_k

#endif  // ADAPTIVE_K_REPORT_H_
