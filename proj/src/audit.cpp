#include "leakaudit/audit.hpp"

#include <chrono>
#include <ctime>

#include "leakaudit/degender.hpp"
#include "leakaudit/error.hpp"
#include "leakaudit/random.hpp"
#include "leakaudit/text.hpp"

namespace leakaudit {

namespace {

// Stage tags fanned out from the single global seed.
std::uint64_t stage_seed(const AuditConfig& c, std::string_view tag) { return derive_seed(c.seed, tag); }

StageResult train_stage(const std::string& name, const std::string& dataset, const Corpus& corpus,
                        const AuditConfig& config) {
  const Corpus train_set = corpus.subset(Split::train);
  const Corpus val_set = corpus.subset(Split::val);
  const Corpus test_set = corpus.subset(Split::test);
  Tokenizer tokenizer;
  tokenizer.reserved.insert(config.mask_symbol);
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::build(train_set, tokenizer, config.vocab_min_count));
  TrainConfig tc = config.train;
  tc.seed = stage_seed(config, "train-" + name);

  StageResult s;
  s.name = name;
  s.dataset = dataset;
  s.provenance = corpus.provenance;
  s.model = train(train_set, val_set, tc, vocab, tokenizer);
  s.eval = evaluate(s.model, test_set);
  s.train_counts = train_set.class_counts();
  s.test_counts = test_set.class_counts();
  return s;
}

Json stage_json(const StageResult& s) {
  return Json{{"name", s.name},
              {"dataset", s.dataset},
              {"provenance", to_string(s.provenance)},
              {"corpus_file", s.name == "baseline" ? "corpus_split.jsonl" : "corpus_" + s.name + ".jsonl"},
              {"model_file", "model_" + s.name + ".json"},
              {"train", {{"female", s.train_counts.female}, {"male", s.train_counts.male}}},
              {"test", {{"female", s.test_counts.female}, {"male", s.test_counts.male}}},
              {"vocabulary_size", s.model.vocab->size()},
              {"best_epoch", s.model.best_epoch},
              {"best_val_macro_f1", s.model.best_val_macro_f1},
              {"eval", to_json(s.eval)}};
}

Json delta_json(const EvalReport& from, const EvalReport& to) {
  return Json{{"accuracy", to.accuracy - from.accuracy},
              {"macro_precision", to.macro_precision - from.macro_precision},
              {"macro_recall", to.macro_recall - from.macro_recall},
              {"macro_f1", to.macro_f1 - from.macro_f1}};
}

Corpus masked_or_copy(const Corpus& edg, const std::set<std::string>& tokens, const std::string& symbol) {
  if (tokens.empty()) {
    Corpus copy = edg;
    copy.provenance = Provenance::masked;
    return copy;
  }
  return mask_corpus(edg, MaskPlan::make(tokens, symbol));
}

FlipTable run_flips(const Corpus& edg, const StageResult& edg_stage, const StageResult& masked_stage,
                    const std::set<std::string>& tokens, const AuditConfig& config, std::string_view tag) {
  FlipConfig fc;
  fc.candidate_tokens.assign(tokens.begin(), tokens.end());
  fc.runs = config.flip_runs;
  fc.seed = stage_seed(config, tag);
  fc.subset_rule = config.flip_subset_rule;
  fc.mask_symbol = config.mask_symbol;
  if (tokens.empty()) {
    FlipTable t;
    t.runs = fc.runs;
    t.seed = fc.seed;
    t.subset_rule = fc.subset_rule;
    t.warnings.push_back("no candidate tokens were selected; flip analysis skipped");
    return t;
  }
  const Corpus letters = select_letters(edg, config.flip_letters);
  return flip_analysis(letters, edg_stage.model, masked_stage.model, MaskPlan::make(tokens, config.mask_symbol), fc);
}

}  // namespace

const StageResult& AuditResult::stage(const std::string& name) const {
  for (const auto& s : stages) {
    if (s.name == name) return s;
  }
  throw InvariantError("audit has no stage named " + name);
}

AuditResult run_audit(const Corpus& input, const Lexicon& lexicon, const PosLexicon& pos, const AuditConfig& config,
                      const ArtifactSink& sink) {
  config.validate();
  validate_corpus(input);
  if (input.empty()) throw DataError("input corpus is empty");
  auto emit = [&](const std::string& name, const std::string& contents) {
    if (sink) sink(name, contents);
  };

  AuditResult result;
  result.config = config;
  result.config.shap.mask_symbol = config.mask_symbol;
  result.stages.reserve(4);

  Corpus corpus = input;
  if (!corpus.has_splits()) {
    corpus = stratified_split(corpus, config.split, stage_seed(config, "split"));
    result.generated_split = true;
  }
  emit("corpus_split.jsonl", serialize_corpus(corpus));

  result.stages.push_back(train_stage("baseline", "Original (non-EDG)", corpus, config));
  emit("model_baseline.json", serialize_model(result.stages.back().model));

  const Corpus edg = degender_corpus(corpus, lexicon, [&](const Letter&, const EdgResult& r) {
    result.edg_replacements += r.replacements.size();
    result.edg_warnings += r.warnings.size();
  });
  for (const auto& l : edg.letters) {
    for (const auto& m : lexicon.match_all(l.text)) result.residual_male_matches += m.term.gender == Gender::male;
  }
  if (result.residual_male_matches > 0) {
    result.warnings.push_back(std::to_string(result.residual_male_matches) +
                              " male-term matches remain after explicit de-gendering");
  }
  emit("corpus_edg.jsonl", serialize_corpus(edg));
  result.stages.push_back(train_stage("edg", "EDG (baseline)", edg, config));
  emit("model_edg.json", serialize_model(result.stages.back().model));
  const StageResult& edg_stage = result.stages.back();

  result.tfidf = gender_tfidf(select_letters(edg, config.tfidf_letters), Tokenizer{}, pos, config.tfidf);
  RankOptions shap = result.config.shap;
  shap.seed = stage_seed(config, "shap");
  const Corpus background = edg.subset(Split::train);
  result.shap = rank_tokens(select_letters(edg, config.shap_letters), edg_stage.model, pos, shap, &background);

  const std::set<std::string> reserved = Tokenizer{}.reserved;
  for (const auto& t : result.shap.male.tokens(config.mask_pos_groups)) result.shap_tokens.insert(t);
  for (const auto& t : result.shap.female.tokens(config.mask_pos_groups)) result.shap_tokens.insert(t);
  result.tfidf_tokens = result.tfidf.selected_tokens(config.mask_pos_groups);
  for (auto* set : {&result.shap_tokens, &result.tfidf_tokens}) {
    for (const auto& r : reserved) set->erase(r);
    set->erase(config.mask_symbol);
  }
  if (result.shap_tokens.empty()) result.warnings.push_back("no SHAP tokens passed the support filter");
  if (result.tfidf_tokens.empty()) result.warnings.push_back("no TF-IDF tokens passed the count filter");

  const Corpus edg_shap = masked_or_copy(edg, result.shap_tokens, config.mask_symbol);
  emit("corpus_edg_shap.jsonl", serialize_corpus(edg_shap));
  result.stages.push_back(train_stage("edg_shap", "EDG w/o SHAP tokens", edg_shap, config));
  emit("model_edg_shap.json", serialize_model(result.stages.back().model));

  const Corpus edg_tfidf = masked_or_copy(edg, result.tfidf_tokens, config.mask_symbol);
  emit("corpus_edg_tfidf.jsonl", serialize_corpus(edg_tfidf));
  result.stages.push_back(train_stage("edg_tfidf", "EDG w/o TF-IDF tokens", edg_tfidf, config));
  emit("model_edg_tfidf.json", serialize_model(result.stages.back().model));

  result.shap_flips =
      run_flips(edg, result.stage("edg"), result.stage("edg_shap"), result.shap_tokens, config, "flips-shap");
  result.tfidf_flips =
      run_flips(edg, result.stage("edg"), result.stage("edg_tfidf"), result.tfidf_tokens, config, "flips-tfidf");
  for (const auto* t : {&result.shap_flips, &result.tfidf_flips}) {
    for (const auto& w : t->warnings) result.warnings.push_back(w);
  }
  return result;
}

Json audit_json(const AuditResult& r, const std::string& generated_at) {
  Json j;
  j["tool"] = "leakaudit";
  j["version"] = LEAKAUDIT_VERSION;
  j["generated_at"] = generated_at;
  j["config"] = to_json(r.config);
  j["seeds"] = Json{{"global", r.config.seed},
                    {"split", stage_seed(r.config, "split")},
                    {"train_baseline", stage_seed(r.config, "train-baseline")},
                    {"train_edg", stage_seed(r.config, "train-edg")},
                    {"train_edg_shap", stage_seed(r.config, "train-edg_shap")},
                    {"train_edg_tfidf", stage_seed(r.config, "train-edg_tfidf")},
                    {"shap", stage_seed(r.config, "shap")},
                    {"flips_shap", stage_seed(r.config, "flips-shap")},
                    {"flips_tfidf", stage_seed(r.config, "flips-tfidf")}};
  j["split"] = r.generated_split ? "generated" : "provided";
  j["edg"] = Json{{"replacements", r.edg_replacements},
                  {"fallback_warnings", r.edg_warnings},
                  {"residual_male_matches", r.residual_male_matches}};
  Json stages = Json::array();
  for (const auto& s : r.stages) stages.push_back(stage_json(s));
  j["stages"] = stages;
  const EvalReport& base = r.stage("baseline").eval;
  const EvalReport& edg = r.stage("edg").eval;
  j["deltas"] = Json{{"edg_vs_baseline", delta_json(base, edg)},
                     {"edg_shap_vs_edg", delta_json(edg, r.stage("edg_shap").eval)},
                     {"edg_tfidf_vs_edg", delta_json(edg, r.stage("edg_tfidf").eval)}};
  j["tfidf"] = to_json(r.tfidf);
  j["shap"] = to_json(r.shap);
  j["masking"] = Json{{"symbol", r.config.mask_symbol},
                      {"shap_tokens", r.shap_tokens},
                      {"tfidf_tokens", r.tfidf_tokens}};
  j["flips"] = Json{{"shap", to_json(r.shap_flips)}, {"tfidf", to_json(r.tfidf_flips)}};
  j["warnings"] = r.warnings;
  return j;
}

std::string audit_markdown(const AuditResult& r) {
  std::string md = "# Gender leakage audit\n\n";
  md += "Seed " + std::to_string(r.config.seed) + ", model " + std::string(to_string(r.config.train.kind)) +
        ", split " + (r.generated_split ? "generated" : "provided") + ".\n\n";

  md += "## Classification on the EDG test split\n\n";
  md += render_markdown(metrics_table({{"EDG (baseline)", r.stage("edg").eval}}));

  md += "\n## Ablation\n\n";
  const double edg_f1 = r.stage("edg").eval.macro_f1;
  std::vector<AblationRow> rows;
  for (const auto& s : r.stages) {
    AblationRow row{s.dataset, s.eval, std::nullopt};
    if (s.name == "edg_shap" || s.name == "edg_tfidf") row.macro_f1_delta = s.eval.macro_f1 - edg_f1;
    rows.push_back(row);
  }
  md += render_markdown(ablation_table(rows));

  auto flips = [&](const std::string& title, const FlipTable& t) {
    md += "\n## " + title + "\n\n";
    FlipTable top = t;
    if (top.rows.size() > 10) top.rows.resize(10);
    md += "Subset: " + std::to_string(t.subset_counts.female) + " female, " +
          std::to_string(t.subset_counts.male) + " male letters; " + std::to_string(t.runs) + " runs.\n\n";
    md += render_markdown(flip_table(top));
  };
  flips("Prediction flips for TF-IDF tokens", r.tfidf_flips);
  flips("Prediction flips for SHAP tokens", r.shap_flips);

  md += "\n## SHAP token rankings\n";
  for (const auto* ranking : {&r.shap.male, &r.shap.female}) {
    for (const auto& [title, table] : ranking_tables(*ranking)) {
      md += "\n### " + title + "\n\n" + render_markdown(table);
    }
  }
  md += "\n## TF-IDF tables\n";
  for (const auto& [title, table] : tfidf_tables(r.tfidf)) {
    md += "\n### " + title + "\n\n" + render_markdown(table);
  }
  if (!r.warnings.empty()) {
    md += "\n## Warnings\n\n";
    for (const auto& w : r.warnings) md += "- " + w + "\n";
  }
  return md;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

AuditResult run_audit_to_dir(const Corpus& corpus, const Lexicon& lexicon, const PosLexicon& pos,
                             const AuditConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;
  auto write_manifest = [&](const std::string& status, const std::string& error) {
    Json m{{"status", status}, {"files", written}};
    if (!error.empty()) m["error"] = error;
    write_file(out_dir / "manifest.json", m.dump(2) + "\n");
  };
  try {
    AuditResult result = run_audit(corpus, lexicon, pos, config, [&](const std::string& name, const std::string& body) {
      write_file(out_dir / name, body);
      written.push_back(name);
    });
    write_file(out_dir / "audit_report.json", audit_json(result, utc_timestamp()).dump(2) + "\n");
    written.push_back("audit_report.json");
    write_file(out_dir / "audit_report.md", audit_markdown(result));
    written.push_back("audit_report.md");
    write_manifest("complete", "");
    return result;
  } catch (const std::exception& e) {
    write_manifest("partial", e.what());
    throw;
  }
}

}  // namespace leakaudit
