#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "leakaudit/attribution.hpp"
#include "leakaudit/config.hpp"
#include "leakaudit/flip.hpp"
#include "leakaudit/model.hpp"

namespace leakaudit {

using Json = nlohmann::ordered_json;

Json to_json(const EvalReport& r);
Json to_json(const TfidfReport& r);
Json to_json(const TokenRanking& r);
Json to_json(const RankResult& r);
Json to_json(const ShapResult& r);
Json to_json(const FlipTable& t);
Json to_json(const AuditConfig& c);

struct TextTable {
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;
  std::vector<bool> right_align;  // per column; empty means first column left, rest right
};

std::string render_markdown(const TextTable& t);
// Space-aligned plain text; bold headers when `color` is set.
std::string render_text(const TextTable& t, bool color = false);
// True when `stream` is a terminal and NO_COLOR is unset or empty.
bool color_enabled(std::FILE* stream);

// Per-class and aggregate metrics, one row per class per model.
TextTable metrics_table(const std::vector<std::pair<std::string, EvalReport>>& models);

struct AblationRow {
  std::string dataset;
  EvalReport report;
  std::optional<double> macro_f1_delta;  // against the EDG baseline
};
// Accuracy and macro P/R/F1 per dataset, with the macro-F1 change in
// percentage points for the masked datasets.
TextTable ablation_table(const std::vector<AblationRow>& rows);

TextTable flip_table(const FlipTable& t);

// One titled table per POS group, e.g. "Male adjectives".
std::vector<std::pair<std::string, TextTable>> ranking_tables(const TokenRanking& r);
std::vector<std::pair<std::string, TextTable>> tfidf_tables(const TfidfReport& r);

}  // namespace leakaudit
