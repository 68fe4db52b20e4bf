#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "leakaudit/attribution.hpp"
#include "leakaudit/config.hpp"
#include "leakaudit/corpus.hpp"
#include "leakaudit/features.hpp"
#include "leakaudit/flip.hpp"
#include "leakaudit/lexicon.hpp"
#include "leakaudit/model.hpp"
#include "leakaudit/report.hpp"

namespace leakaudit {

struct StageResult {
  std::string name;     // baseline, edg, edg_shap, edg_tfidf
  std::string dataset;  // row label in the ablation table
  Provenance provenance = Provenance::real;
  ClassifierModel model;
  EvalReport eval;
  ClassCounts train_counts;
  ClassCounts test_counts;
};

struct AuditResult {
  AuditConfig config;
  bool generated_split = false;
  std::vector<StageResult> stages;
  TfidfReport tfidf;
  RankResult shap;
  std::set<std::string> shap_tokens;
  std::set<std::string> tfidf_tokens;
  FlipTable shap_flips;
  FlipTable tfidf_flips;
  std::size_t edg_replacements = 0;
  std::size_t edg_warnings = 0;
  std::size_t residual_male_matches = 0;
  std::vector<std::string> warnings;

  const StageResult& stage(const std::string& name) const;
};

// Writes each finished artifact under `out_dir` as the stages complete.
// Receives (file name, contents).
using ArtifactSink = std::function<void(const std::string&, const std::string&)>;

AuditResult run_audit(const Corpus& corpus, const Lexicon& lexicon, const PosLexicon& pos,
                      const AuditConfig& config, const ArtifactSink& sink = {});

// The full report; `generated_at` is the only field that varies between runs.
Json audit_json(const AuditResult& result, const std::string& generated_at);
std::string audit_markdown(const AuditResult& result);

// Runs the audit into `out_dir`: corpora, models, audit_report.json,
// audit_report.md and manifest.json. On failure the manifest is still
// written with status "partial" before the error propagates.
AuditResult run_audit_to_dir(const Corpus& corpus, const Lexicon& lexicon, const PosLexicon& pos,
                             const AuditConfig& config, const std::filesystem::path& out_dir);

std::string utc_timestamp();

}  // namespace leakaudit
