#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "leakaudit/attribution.hpp"
#include "leakaudit/corpus.hpp"
#include "leakaudit/features.hpp"
#include "leakaudit/flip.hpp"
#include "leakaudit/model.hpp"

namespace leakaudit {

// Which letters a stage runs over.
enum class LetterSet { all, train, val, test };
std::string_view to_string(LetterSet s);
LetterSet parse_letter_set(std::string_view s);
Corpus select_letters(const Corpus& corpus, LetterSet set);

struct AuditConfig {
  std::uint64_t seed = 0;
  SplitRatios split;

  TrainConfig train;
  std::size_t vocab_min_count = 2;

  TfidfOptions tfidf;
  LetterSet tfidf_letters = LetterSet::all;

  RankOptions shap;
  LetterSet shap_letters = LetterSet::all;

  std::string mask_symbol = "[MASK]";
  std::set<std::string> mask_pos_groups{"adjective", "noun", "verb"};

  std::size_t flip_runs = 50;
  SubsetRule flip_subset_rule = SubsetRule::paper_rule;
  LetterSet flip_letters = LetterSet::test;

  void validate() const;
};

// Flat `key = value` text. `[section]` headers prefix the keys that follow
// with "section.". `#` starts a comment; values may be double-quoted.
std::map<std::string, std::string> parse_key_values(std::string_view text);

// Applies recognised keys on top of `config`; unknown keys are usage errors.
void apply_settings(AuditConfig& config, const std::map<std::string, std::string>& settings);

AuditConfig load_audit_config(const std::filesystem::path& path, AuditConfig base = {});

// Canonical `key = value` listing of every setting, sorted by key.
std::map<std::string, std::string> describe(const AuditConfig& config);

}  // namespace leakaudit
