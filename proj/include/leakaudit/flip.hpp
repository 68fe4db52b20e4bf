#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leakaudit/corpus.hpp"
#include "leakaudit/degender.hpp"
#include "leakaudit/model.hpp"

namespace leakaudit {

enum class SubsetRule { paper_rule, all_letters };
std::string_view to_string(SubsetRule r);
SubsetRule parse_subset_rule(std::string_view s);

struct FlipConfig {
  std::vector<std::string> candidate_tokens;
  std::size_t runs = 50;
  std::uint64_t seed = 0;
  SubsetRule subset_rule = SubsetRule::paper_rule;
  std::string mask_symbol = "[MASK]";

  void validate() const;
};

struct FlipRow {
  std::string token;
  double f_to_m = 0.0;
  double m_to_f = 0.0;
  double abs_diff = 0.0;
};

struct FlipTable {
  std::vector<FlipRow> rows;  // abs_diff descending, then token
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  SubsetRule subset_rule = SubsetRule::paper_rule;
  ClassCounts subset_counts;
  std::vector<std::string> warnings;
};

struct FlipCounts {
  std::size_t f_to_m = 0;
  std::size_t m_to_f = 0;
  bool operator==(const FlipCounts&) const = default;
};

// Letters of the EDG corpus that model_edg gets right on the EDG text and
// model_masked gets wrong once the plan's tokens are masked.
Corpus select_subset(const Corpus& corpus_edg, const ClassifierModel& model_edg,
                     const ClassifierModel& model_masked, const MaskPlan& plan);

// Direction of model_edg's prediction change when only `token` is masked:
// +1 female to male, -1 male to female, 0 unchanged or token absent.
int flip_direction(const Letter& letter, const ClassifierModel& model_edg, const std::string& token,
                   const std::string& mask_symbol = "[MASK]");

FlipCounts count_flips(const Corpus& subset, const ClassifierModel& model_edg, const std::string& token,
                       const std::string& mask_symbol = "[MASK]");

// Means over config.runs majority-class subsamples of the selected subset.
// Run r draws its subsample with seed config.seed + r.
FlipTable flip_analysis(const Corpus& corpus_edg, const ClassifierModel& model_edg,
                        const ClassifierModel& model_masked, const MaskPlan& plan, const FlipConfig& config);

// Same averaging over an already selected subset.
FlipTable flip_table_for_subset(const Corpus& subset, const ClassifierModel& model_edg, const FlipConfig& config);

}  // namespace leakaudit
