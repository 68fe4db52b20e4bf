#include "leakaudit/flip.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "leakaudit/error.hpp"

namespace leakaudit {

std::string_view to_string(SubsetRule r) {
  return r == SubsetRule::paper_rule ? "paper_rule" : "all_letters";
}

SubsetRule parse_subset_rule(std::string_view s) {
  if (s == "paper_rule" || s == "paper") return SubsetRule::paper_rule;
  if (s == "all_letters" || s == "all") return SubsetRule::all_letters;
  throw UsageError("unknown subset rule '" + std::string(s) + "'");
}

void FlipConfig::validate() const {
  if (runs < 1) throw UsageError("flip analysis needs runs >= 1");
  if (candidate_tokens.empty()) throw UsageError("flip analysis needs at least one candidate token");
  for (const auto& t : candidate_tokens) {
    if (t.empty()) throw UsageError("empty candidate token");
  }
  if (mask_symbol.empty()) throw UsageError("mask symbol is empty");
}

Corpus select_subset(const Corpus& corpus_edg, const ClassifierModel& model_edg,
                     const ClassifierModel& model_masked, const MaskPlan& plan) {
  plan.validate();
  Corpus out;
  out.provenance = corpus_edg.provenance;
  for (const auto& letter : corpus_edg.letters) {
    if (predict(model_edg, letter) != letter.gender) continue;
    Letter masked = letter;
    masked.text = apply_mask(letter.text, plan);
    if (predict(model_masked, masked) == letter.gender) continue;
    out.letters.push_back(letter);
  }
  return out;
}

int flip_direction(const Letter& letter, const ClassifierModel& model_edg, const std::string& token,
                   const std::string& mask_symbol) {
  if (!model_edg.is_linear()) throw UsageError("flip counting needs a model that can score edited text");
  const MaskPlan plan = MaskPlan::make({token}, mask_symbol);
  const std::string masked = apply_mask(letter.text, plan);
  if (masked == letter.text) return 0;
  const Gender before = label_for(model_edg.proba_of_text(letter.text), model_edg.threshold);
  const Gender after = label_for(model_edg.proba_of_text(masked), model_edg.threshold);
  if (before == after) return 0;
  return after == Gender::male ? 1 : -1;
}

FlipCounts count_flips(const Corpus& subset, const ClassifierModel& model_edg, const std::string& token,
                       const std::string& mask_symbol) {
  if (token.empty()) throw UsageError("flip token is empty");
  FlipCounts c;
  for (const auto& letter : subset.letters) {
    const int d = flip_direction(letter, model_edg, token, mask_symbol);
    if (d > 0) ++c.f_to_m;
    if (d < 0) ++c.m_to_f;
  }
  return c;
}

FlipTable flip_table_for_subset(const Corpus& subset, const ClassifierModel& model_edg, const FlipConfig& config) {
  config.validate();
  FlipTable table;
  table.runs = config.runs;
  table.seed = config.seed;
  table.subset_rule = config.subset_rule;
  table.subset_counts = subset.class_counts();

  std::vector<std::string> tokens = config.candidate_tokens;
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());

  if (subset.empty()) {
    table.warnings.push_back("flip subset is empty; no letters satisfy the selection rule");
    for (const auto& t : tokens) table.rows.push_back({t, 0.0, 0.0, 0.0});
    return table;
  }
  const bool balanced = table.subset_counts.female > 0 && table.subset_counts.male > 0;
  if (!balanced) {
    table.warnings.push_back("flip subset holds a single class; majority subsampling skipped");
  }

  // Each letter's flip outcome does not depend on the run, so compute it once.
  std::unordered_map<std::string, std::vector<int>> outcome;
  for (const auto& letter : subset.letters) {
    auto& row = outcome[letter.id];
    row.reserve(tokens.size());
    for (const auto& t : tokens) row.push_back(flip_direction(letter, model_edg, t, config.mask_symbol));
  }

  std::vector<double> f_to_m(tokens.size(), 0.0);
  std::vector<double> m_to_f(tokens.size(), 0.0);
  for (std::size_t run = 0; run < config.runs; ++run) {
    const Corpus sample = balanced ? subsample_majority(subset, config.seed + run) : subset;
    for (const auto& letter : sample.letters) {
      const auto& row = outcome.at(letter.id);
      for (std::size_t k = 0; k < tokens.size(); ++k) {
        if (row[k] > 0) f_to_m[k] += 1.0;
        if (row[k] < 0) m_to_f[k] += 1.0;
      }
    }
  }
  const double runs = static_cast<double>(config.runs);
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    FlipRow r{tokens[k], f_to_m[k] / runs, m_to_f[k] / runs, 0.0};
    r.abs_diff = std::abs(r.f_to_m - r.m_to_f);
    table.rows.push_back(r);
  }
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const FlipRow& a, const FlipRow& b) {
    if (a.abs_diff != b.abs_diff) return a.abs_diff > b.abs_diff;
    return a.token < b.token;
  });
  return table;
}

FlipTable flip_analysis(const Corpus& corpus_edg, const ClassifierModel& model_edg,
                        const ClassifierModel& model_masked, const MaskPlan& plan, const FlipConfig& config) {
  config.validate();
  const Corpus subset = config.subset_rule == SubsetRule::paper_rule
                            ? select_subset(corpus_edg, model_edg, model_masked, plan)
                            : corpus_edg;
  return flip_table_for_subset(subset, model_edg, config);
}

}  // namespace leakaudit
