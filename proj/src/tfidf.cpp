#include <algorithm>
#include <cmath>
#include <map>

#include "leakaudit/error.hpp"
#include "leakaudit/features.hpp"

namespace leakaudit {

std::set<std::string> TfidfReport::selected_tokens(const std::set<std::string>& pos_groups) const {
  std::set<std::string> out;
  for (const auto& table : tables) {
    if (!pos_groups.empty() && !pos_groups.contains(table.pos)) continue;
    for (const auto& row : table.rows) out.insert(row.token);
  }
  return out;
}

TfidfReport gender_tfidf(const Corpus& corpus, const Tokenizer& tokenizer, const PosLexicon& pos,
                         const TfidfOptions& options) {
  std::map<std::string, std::array<std::size_t, 2>> counts;  // [female, male]
  std::array<std::size_t, 2> totals{};
  for (const auto& letter : corpus.letters) {
    const int g = static_cast<int>(letter.gender);
    for (const auto& span : tokenizer.spans(letter.text)) {
      counts[span.token][g] += 1;
      totals[g] += 1;
    }
  }
  if (totals[0] == 0) throw DataError("female aggregate document is empty");
  if (totals[1] == 0) throw DataError("male aggregate document is empty");

  constexpr double kDocs = 2.0;
  std::array<double, 2> norm_sq{};
  TfidfReport report;
  report.options = options;
  report.female_tokens = totals[0];
  report.male_tokens = totals[1];
  report.rows.reserve(counts.size());
  for (const auto& [token, c] : counts) {
    const double df = static_cast<double>((c[0] > 0) + (c[1] > 0));
    const double idf = std::log((1.0 + kDocs) / (1.0 + df)) + 1.0;
    TfidfRow row;
    row.token = token;
    row.pos = pos.tag(token);
    row.score_female = static_cast<double>(c[0]) / static_cast<double>(totals[0]) * idf;
    row.score_male = static_cast<double>(c[1]) / static_cast<double>(totals[1]) * idf;
    row.count = c[0] + c[1];
    norm_sq[0] += row.score_female * row.score_female;
    norm_sq[1] += row.score_male * row.score_male;
    report.rows.push_back(std::move(row));
  }
  const double nf = std::sqrt(norm_sq[0]);
  const double nm = std::sqrt(norm_sq[1]);
  for (auto& row : report.rows) {
    row.score_female /= nf;
    row.score_male /= nm;
    row.diff = row.score_male - row.score_female;
  }

  std::map<std::string, std::vector<const TfidfRow*>> by_pos;
  for (const auto& row : report.rows) {
    if (row.count < options.min_count || tokenizer.is_reserved(row.token)) continue;
    by_pos[row.pos].push_back(&row);
  }
  std::set<std::string> groups;
  for (const auto& [g, _] : by_pos) groups.insert(g);
  for (const auto& group : ordered_pos_groups(groups)) {
    const auto& candidates = by_pos[group];
    for (Gender direction : {Gender::male, Gender::female}) {
      TfidfTable table;
      table.pos = group;
      table.direction = direction;
      for (const TfidfRow* r : candidates) {
        if ((direction == Gender::male && r->diff > 0) || (direction == Gender::female && r->diff < 0)) {
          table.rows.push_back(*r);
        }
      }
      std::sort(table.rows.begin(), table.rows.end(), [](const TfidfRow& a, const TfidfRow& b) {
        if (std::abs(a.diff) != std::abs(b.diff)) return std::abs(a.diff) > std::abs(b.diff);
        return a.token < b.token;
      });
      if (table.rows.size() > options.top_k) table.rows.resize(options.top_k);
      report.tables.push_back(std::move(table));
    }
  }
  return report;
}

}  // namespace leakaudit
