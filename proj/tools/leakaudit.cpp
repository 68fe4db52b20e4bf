// leakaudit command-line interface.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "leakaudit/attribution.hpp"
#include "leakaudit/audit.hpp"
#include "leakaudit/config.hpp"
#include "leakaudit/corpus.hpp"
#include "leakaudit/degender.hpp"
#include "leakaudit/error.hpp"
#include "leakaudit/features.hpp"
#include "leakaudit/flip.hpp"
#include "leakaudit/lexicon.hpp"
#include "leakaudit/model.hpp"
#include "leakaudit/report.hpp"
#include "leakaudit/synthetic.hpp"
#include "leakaudit/text.hpp"

namespace fs = std::filesystem;
using namespace leakaudit;

namespace {

Lexicon lexicon_from(const std::string& path) { return path.empty() ? default_lexicon() : load_lexicon(path); }

PosLexicon pos_from(const std::string& path) { return path.empty() ? default_pos_lexicon() : load_pos_lexicon(path); }

ClassifierModel model_from(const fs::path& path) {
  if (path.extension() == ".jsonl") return load_external_model(path);
  return load_model(path);
}

void write_json(const fs::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

void print_table(const std::string& title, const TextTable& t) {
  const bool color = color_enabled(stdout);
  std::cout << (color ? "\x1b[1m" + title + "\x1b[0m" : title) << "\n" << render_text(t, color) << "\n";
}

std::set<std::string> parse_groups(const std::string& csv) {
  std::set<std::string> out;
  for (auto part : split(csv, ',')) {
    if (!trim(part).empty()) out.emplace(trim(part));
  }
  return out;
}

// Tokens from a TF-IDF report, a SHAP report, or a plain list (one token per
// line, '#' comments).
std::set<std::string> tokens_from(const fs::path& path, const std::set<std::string>& groups) {
  const std::string text = read_file(path);
  std::set<std::string> out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DataError(path.string() + ": invalid JSON");
    auto take_groups = [&](const Json& tables) {
      for (const auto& t : tables) {
        if (!groups.empty() && !groups.contains(t.at("pos").get<std::string>())) continue;
        for (const auto& row : t.at("rows")) out.insert(row.at("token").get<std::string>());
      }
    };
    if (j.contains("tables")) {
      take_groups(j.at("tables"));
    } else if (j.contains("male") && j.contains("female")) {
      take_groups(j.at("male").at("groups"));
      take_groups(j.at("female").at("groups"));
    } else {
      throw DataError(path.string() + ": not a TF-IDF or SHAP report");
    }
    return out;
  }
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    out.emplace(line);
  }
  return out;
}

Corpus letters_for_eval(const Corpus& corpus, const std::string& which) {
  if (which.empty()) return corpus.has_splits() ? corpus.subset(Split::test) : corpus;
  return select_letters(corpus, parse_letter_set(which));
}

int fail(ErrorKind kind, const std::string& message) {
  const char* name = kind == ErrorKind::usage ? "usage" : kind == ErrorKind::data ? "data" : "invariant";
  std::cerr << Json{{"error", name}, {"message", message}}.dump() << std::endl;
  return static_cast<int>(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measure and mitigate gender leakage in evaluative text corpora"};
  app.set_version_flag("--version", std::string(LEAKAUDIT_VERSION));
  app.require_subcommand(1);

  std::string in, out, lexicon_path, trace_path, spec_path, ratios = "0.8,0.1,0.1", kind = "logistic",
                                                              config_path, model_path, pos_path, tokens_path,
                                                              mask_symbol = "[MASK]", pos_groups = "adjective,noun,verb",
                                                              letters, masked_model_path, subset_rule = "paper_rule";
  std::uint64_t seed = 0;
  std::size_t top_k = 10, min_count = 20, samples = 2000, min_support = 20, sample_letters = 0, runs = 50,
              vocab_min_count = 2, exact_cap = kDefaultExactCap;

  auto* degender = app.add_subcommand("degender", "Replace explicit male terms with female counterparts");
  degender->add_option("in", in, "Input corpus (JSON lines)")->required();
  degender->add_option("out", out, "Output corpus")->required();
  degender->add_option("--lexicon", lexicon_path, "Lexicon TSV (default: built-in)");
  degender->add_option("--trace", trace_path, "Write one JSON line per replacement");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus from a cue specification");
  synth->add_option("spec", spec_path, "Cue specification (JSON)")->required();
  synth->add_option("out", out, "Output corpus")->required();

  auto* split_cmd = app.add_subcommand("split", "Assign stratified train/val/test splits");
  split_cmd->add_option("in", in)->required();
  split_cmd->add_option("out", out)->required();
  split_cmd->add_option("--ratios", ratios, "train,val,test")->capture_default_str();
  split_cmd->add_option("--seed", seed)->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train a bag-of-words gender classifier");
  train_cmd->add_option("in", in)->required();
  train_cmd->add_option("model-out", out)->required();
  train_cmd->add_option("--kind", kind, "logistic or naive_bayes")->capture_default_str();
  train_cmd->add_option("--config", config_path, "Settings file (model.* keys)");
  train_cmd->add_option("--seed", seed)->capture_default_str();
  train_cmd->add_option("--vocab-min-count", vocab_min_count)->capture_default_str();

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model");
  eval_cmd->add_option("model", model_path, "Model JSON, or JSON lines of precomputed probabilities")->required();
  eval_cmd->add_option("in", in)->required();
  eval_cmd->add_option("report-out", out)->required();
  eval_cmd->add_option("--letters", letters, "all, train, val or test (default: test when splits exist)");

  auto* tfidf_cmd = app.add_subcommand("tfidf", "Gender-aggregate TF-IDF tables");
  tfidf_cmd->add_option("in", in)->required();
  tfidf_cmd->add_option("report-out", out)->required();
  tfidf_cmd->add_option("--pos-lexicon", pos_path);
  tfidf_cmd->add_option("--top-k", top_k)->capture_default_str();
  tfidf_cmd->add_option("--min-count", min_count)->capture_default_str();

  auto* shap_cmd = app.add_subcommand("shap", "Mean-SHAP token rankings per part of speech");
  shap_cmd->add_option("model", model_path)->required();
  shap_cmd->add_option("in", in)->required();
  shap_cmd->add_option("report-out", out)->required();
  shap_cmd->add_option("--samples", samples, "Permutations per letter above the exact cap")->capture_default_str();
  shap_cmd->add_option("--min-support", min_support)->capture_default_str();
  shap_cmd->add_option("--sample-letters", sample_letters, "Attribute a seeded sample of letters (0: all)");
  shap_cmd->add_option("--top-k", top_k)->capture_default_str();
  shap_cmd->add_option("--exact-cap", exact_cap)->capture_default_str();
  shap_cmd->add_option("--seed", seed)->capture_default_str();
  shap_cmd->add_option("--pos-lexicon", pos_path);
  shap_cmd->add_option("--mask-symbol", mask_symbol)->capture_default_str();

  auto* mask_cmd = app.add_subcommand("mask", "Mask selected tokens");
  mask_cmd->add_option("in", in)->required();
  mask_cmd->add_option("out", out)->required();
  mask_cmd->add_option("--tokens-from", tokens_path, "TF-IDF or SHAP report, or a token list")->required();
  mask_cmd->add_option("--mask-symbol", mask_symbol)->capture_default_str();
  mask_cmd->add_option("--pos-groups", pos_groups, "POS groups taken from a report")->capture_default_str();

  auto* flips_cmd = app.add_subcommand("flips", "Token-level prediction-flip analysis");
  flips_cmd->add_option("edg-corpus", in)->required();
  flips_cmd->add_option("edg-model", model_path)->required();
  flips_cmd->add_option("masked-model", masked_model_path)->required();
  flips_cmd->add_option("report-out", out)->required();
  flips_cmd->add_option("--tokens-from", tokens_path, "Candidate tokens (report or list)")->required();
  flips_cmd->add_option("--pos-groups", pos_groups)->capture_default_str();
  flips_cmd->add_option("--runs", runs)->capture_default_str();
  flips_cmd->add_option("--seed", seed)->capture_default_str();
  flips_cmd->add_option("--subset-rule", subset_rule, "paper_rule or all_letters")->capture_default_str();
  flips_cmd->add_option("--letters", letters, "all, train, val or test (default: test when splits exist)");
  flips_cmd->add_option("--mask-symbol", mask_symbol)->capture_default_str();

  auto* audit_cmd = app.add_subcommand("audit", "Run the whole audit pipeline");
  audit_cmd->add_option("in", in)->required();
  audit_cmd->add_option("out-dir", out)->required();
  audit_cmd->add_option("--lexicon", lexicon_path);
  audit_cmd->add_option("--pos-lexicon", pos_path);
  auto* audit_seed = audit_cmd->add_option("--seed", seed, "Overrides the seed from --config");
  audit_cmd->add_option("--config", config_path, "Settings file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorKind::usage, e.what());
  }

  try {
    if (degender->parsed()) {
      const Lexicon lexicon = lexicon_from(lexicon_path);
      std::ofstream trace;
      if (!trace_path.empty()) {
        if (fs::path(trace_path).has_parent_path()) fs::create_directories(fs::path(trace_path).parent_path());
        trace.open(trace_path);
        if (!trace) throw UsageError("cannot write " + trace_path);
      }
      std::size_t warnings = 0;
      const Corpus edg = degender_corpus(load_corpus(in), lexicon, [&](const Letter& l, const EdgResult& r) {
        for (const auto& w : r.warnings) std::clog << "warning: " << l.id << ": " << w << '\n';
        warnings += r.warnings.size();
        if (!trace.is_open()) return;
        for (const auto& rep : r.replacements) {
          trace << Json{{"id", l.id},
                        {"span", {rep.begin, rep.end}},
                        {"original", rep.original},
                        {"replacement", rep.replacement}}
                       .dump()
                << '\n';
        }
      });
      save_corpus(edg, out);
      std::cout << "de-gendered " << edg.size() << " letters with lexicon " << lexicon.version() << "\n";
    } else if (synth->parsed()) {
      const SyntheticCorpus s = generate_synthetic(load_cue_spec(spec_path));
      save_corpus(s.corpus, out);
      std::cout << "generated " << s.corpus.size() << " letters; Bayes accuracy " << format_fixed(s.bayes_accuracy, 4)
                << "\n";
    } else if (split_cmd->parsed()) {
      const auto parts = split(ratios, ',');
      if (parts.size() != 3) throw UsageError("--ratios expects three comma-separated numbers");
      AuditConfig c;
      apply_settings(c, {{"split.train", std::string(trim(parts[0]))},
                         {"split.val", std::string(trim(parts[1]))},
                         {"split.test", std::string(trim(parts[2]))}});
      const Corpus result = stratified_split(load_corpus(in), c.split, seed);
      save_corpus(result, out);
      const auto counts = [&](Split s) { return std::to_string(result.subset(s).size()); };
      std::cout << "train " << counts(Split::train) << ", val " << counts(Split::val) << ", test "
                << counts(Split::test) << "\n";
    } else if (train_cmd->parsed()) {
      AuditConfig c;
      c.train.kind = parse_model_kind(kind);
      c.vocab_min_count = vocab_min_count;
      if (!config_path.empty()) c = load_audit_config(config_path, c);
      if (!train_cmd->get_option("--kind")->empty()) c.train.kind = parse_model_kind(kind);
      if (!train_cmd->get_option("--vocab-min-count")->empty()) c.vocab_min_count = vocab_min_count;
      c.train.seed = train_cmd->get_option("--seed")->empty() ? c.seed : seed;
      const Corpus corpus = load_corpus(in);
      const Corpus train_set = corpus.has_splits() ? corpus.subset(Split::train) : corpus;
      const Corpus val_set = corpus.has_splits() ? corpus.subset(Split::val) : Corpus{};
      Tokenizer tokenizer;
      tokenizer.reserved.insert(c.mask_symbol);
      auto vocab = std::make_shared<const Vocabulary>(Vocabulary::build(train_set, tokenizer, c.vocab_min_count));
      const ClassifierModel model = train(train_set, val_set, c.train, vocab, tokenizer);
      save_model(model, out);
      std::cout << "trained " << to_string(model.kind) << " model on " << train_set.size() << " letters, "
                << vocab->size() << " tokens; best epoch " << model.best_epoch << "\n";
    } else if (eval_cmd->parsed()) {
      const ClassifierModel model = model_from(model_path);
      const EvalReport r = evaluate(model, letters_for_eval(load_corpus(in), letters));
      write_json(out, to_json(r));
      print_table("Evaluation", metrics_table({{fs::path(model_path).stem().string(), r}}));
    } else if (tfidf_cmd->parsed()) {
      const TfidfReport r = gender_tfidf(load_corpus(in), Tokenizer{}, pos_from(pos_path), {top_k, min_count});
      write_json(out, to_json(r));
      for (const auto& [title, table] : tfidf_tables(r)) print_table(title, table);
    } else if (shap_cmd->parsed()) {
      const ClassifierModel model = model_from(model_path);
      const Corpus corpus = load_corpus(in);
      RankOptions o;
      o.min_support = min_support;
      o.top_k = top_k;
      o.n_samples = samples;
      o.exact_cap = exact_cap;
      o.seed = seed;
      o.mask_symbol = mask_symbol;
      if (sample_letters > 0) o.sample_size = sample_letters;
      const Corpus background = corpus.has_splits() ? corpus.subset(Split::train) : corpus;
      const RankResult r = rank_tokens(corpus, model, pos_from(pos_path), o, &background);
      write_json(out, to_json(r));
      for (const auto* ranking : {&r.male, &r.female}) {
        for (const auto& [title, table] : ranking_tables(*ranking)) print_table(title, table);
      }
    } else if (mask_cmd->parsed()) {
      const auto tokens = tokens_from(tokens_path, parse_groups(pos_groups));
      const Corpus masked = mask_corpus(load_corpus(in), MaskPlan::make(tokens, mask_symbol));
      save_corpus(masked, out);
      std::cout << "masked " << tokens.size() << " tokens in " << masked.size() << " letters\n";
    } else if (flips_cmd->parsed()) {
      const auto tokens = tokens_from(tokens_path, parse_groups(pos_groups));
      FlipConfig fc;
      fc.candidate_tokens.assign(tokens.begin(), tokens.end());
      fc.runs = runs;
      fc.seed = seed;
      fc.subset_rule = parse_subset_rule(subset_rule);
      fc.mask_symbol = mask_symbol;
      const Corpus corpus = letters_for_eval(load_corpus(in), letters);
      const FlipTable t = flip_analysis(corpus, model_from(model_path), model_from(masked_model_path),
                                        MaskPlan::make(tokens, mask_symbol), fc);
      write_json(out, to_json(t));
      for (const auto& w : t.warnings) std::clog << "warning: " << w << '\n';
      print_table("Prediction flips", flip_table(t));
    } else if (audit_cmd->parsed()) {
      AuditConfig c;
      if (!config_path.empty()) c = load_audit_config(config_path, c);
      if (!audit_seed->empty()) c.seed = seed;
      const AuditResult r = run_audit_to_dir(load_corpus(in), lexicon_from(lexicon_path), pos_from(pos_path), c, out);
      std::vector<AblationRow> rows;
      for (const auto& s : r.stages) rows.push_back({s.dataset, s.eval, std::nullopt});
      print_table("Audit", ablation_table(rows));
      for (const auto& w : r.warnings) std::clog << "warning: " << w << '\n';
      std::cout << "report written to " << (fs::path(out) / "audit_report.json").string() << "\n";
    }
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(ErrorKind::data, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(ErrorKind::usage, e.what());
  } catch (const std::exception& e) {
    return fail(ErrorKind::invariant, e.what());
  }
  return 0;
}
