#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "leakaudit/audit.hpp"
#include "leakaudit/degender.hpp"
#include "leakaudit/error.hpp"
#include "leakaudit/synthetic.hpp"
#include "leakaudit/text.hpp"

using namespace leakaudit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("leakaudit_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + LEAKAUDIT_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

CueSpec small_spec(std::uint64_t seed) {
  CueSpec spec;
  spec.female_letters = 150;
  spec.male_letters = 150;
  spec.min_length = 25;
  spec.max_length = 45;
  spec.seed = seed;
  spec.explicit_terms = {{"he", Gender::male, 1.0, 2}, {"she", Gender::female, 1.0, 2}};
  spec.implicit_cues = {{"leadership", Gender::male, 0.8, 0.2}};
  return spec;
}

AuditConfig small_config() {
  AuditConfig cfg;
  cfg.seed = 7;
  cfg.tfidf.min_count = 5;
  cfg.shap.min_support = 5;
  cfg.shap.sample_size = 60;
  cfg.shap.n_samples = 200;
  cfg.flip_runs = 5;
  return cfg;
}

}  // namespace

TEST_CASE("key-value configuration text") {
  const auto kv = parse_key_values(
      "seed = 3  # trailing comment\n"
      "\n"
      "[model]\n"
      "kind = naive_bayes\n"
      "[mask]\n"
      "symbol = \"[HIDDEN] # not a comment\"\n");
  CHECK(kv.at("seed") == "3");
  CHECK(kv.at("model.kind") == "naive_bayes");
  CHECK(kv.at("mask.symbol") == "[HIDDEN] # not a comment");
  try {
    parse_key_values("seed = 1\nnot a pair\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  AuditConfig cfg;
  apply_settings(cfg, kv);
  CHECK(cfg.seed == 3);
  CHECK(cfg.train.kind == ModelKind::naive_bayes);
  CHECK(cfg.mask_symbol == "[HIDDEN] # not a comment");
  apply_settings(cfg, {{"mask.pos_groups", "noun,verb"}, {"flips.subset_rule", "all"}, {"shap.sample_letters", "0"}});
  CHECK(cfg.mask_pos_groups == std::set<std::string>{"noun", "verb"});
  CHECK(cfg.flip_subset_rule == SubsetRule::all_letters);
  CHECK_FALSE(cfg.shap.sample_size.has_value());
  CHECK_THROWS_AS(apply_settings(cfg, {{"nonsense", "1"}}), UsageError);
  CHECK_THROWS_AS(apply_settings(cfg, {{"seed", "abc"}}), UsageError);

  // describe() round-trips through apply_settings.
  AuditConfig other;
  apply_settings(other, describe(cfg));
  CHECK(describe(other) == describe(cfg));
}

TEST_CASE("report tables have fixed shapes") {
  std::vector<Gender> t{Gender::male, Gender::female, Gender::male, Gender::female};
  std::vector<Gender> p{Gender::male, Gender::male, Gender::male, Gender::female};
  const EvalReport r = evaluate_predictions(t, p);

  const TextTable metrics = metrics_table({{"A", r}, {"B", r}});
  CHECK(metrics.headers.size() == 12);
  CHECK(metrics.rows.size() == 4);
  CHECK(metrics.rows[0][1] == "Female");
  CHECK(metrics.rows[1][1] == "Male");

  const TextTable abl = ablation_table({{"EDG (baseline)", r, std::nullopt}, {"EDG w/o SHAP tokens", r, -0.027}});
  CHECK(abl.headers == std::vector<std::string>{"Dataset", "Acc.", "Macro P", "Macro R", "Macro F1"});
  CHECK(abl.rows[1][4].find("(↓ 2.7%)") != std::string::npos);
  CHECK(abl.rows[1][1] == "0.750");

  FlipTable ft;
  ft.rows = {{"leadership", 1.5, 3.25, 1.75}};
  const TextTable flips = flip_table(ft);
  CHECK(flips.headers.size() == 4);
  CHECK(flips.rows[0] == std::vector<std::string>{"leadership", "1.50", "3.25", "1.75"});

  const std::string md = render_markdown(flips);
  std::istringstream lines(md);
  std::string first, second;
  std::getline(lines, first);
  std::getline(lines, second);
  CHECK(first == "| Token | F → M Count | M → F Count | Absolute Difference |");
  CHECK(second == "|:---|---:|---:|---:|");
  const std::string plain = render_text(flips);
  CHECK(plain.find("leadership") != std::string::npos);
  CHECK(plain.find("\x1b[") == std::string::npos);
}

TEST_CASE("audit pipeline on a small explicit-cue corpus") {
  const Corpus corpus = generate_synthetic(small_spec(11)).corpus;
  const AuditConfig cfg = small_config();
  const AuditResult a = run_audit(corpus, default_lexicon(), default_pos_lexicon(), cfg);
  REQUIRE(a.stages.size() == 4);
  CHECK(a.stages[0].name == "baseline");
  CHECK(a.stages[1].name == "edg");
  CHECK(a.generated_split);
  CHECK(a.stage("baseline").eval.accuracy >= 0.95);
  // With the pronouns neutralized only the weaker implicit cue is left.
  CHECK(a.stage("edg").eval.accuracy < a.stage("baseline").eval.accuracy);
  CHECK(a.residual_male_matches == 0);
  CHECK(a.edg_replacements > 0);
  CHECK(a.shap_tokens.count("leadership") == 1);
  CHECK(a.shap_tokens.count("[MASK]") == 0);

  const Json j = audit_json(a, "2000-01-01T00:00:00Z");
  for (const char* key : {"tool", "version", "generated_at", "config", "seeds", "split", "edg", "stages", "deltas",
                          "tfidf", "shap", "masking", "flips", "warnings"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j["stages"].size() == 4);

  // Same inputs, same seed: identical report.
  const AuditResult b = run_audit(corpus, default_lexicon(), default_pos_lexicon(), cfg);
  CHECK(audit_json(b, "2000-01-01T00:00:00Z").dump() == j.dump());
  CHECK(audit_markdown(b) == audit_markdown(a));
}

TEST_CASE("command line: errors, trace and a full audit directory") {
  TempDir dir("cli_test");
  const fs::path& d = dir.path;

  Run r = cli("", d);
  CHECK(r.code == 1);
  r = cli("train " + (d / "missing.jsonl").string() + " " + (d / "m.json").string(), d);
  CHECK(r.code == 2);
  {
    const auto err = nlohmann::json::parse(r.err);
    CHECK(err["error"] == "data");
    CHECK(err["message"].get<std::string>().size() > 0);
  }
  r = cli("split x y --ratios 0.5,0.5", d);
  CHECK(r.code == 1);
  CHECK(nlohmann::json::parse(r.err)["error"] == "usage");

  write_file(d / "spec.json",
             R"({"seed": 4, "letters_per_class": 120, "min_length": 25, "max_length": 40,
                 "explicit_terms": [{"surface": "he", "gender": "male"}, {"surface": "she", "gender": "female"}],
                 "implicit_cues": [{"token": "leadership", "gender": "male", "probability": 0.8,
                                    "other_probability": 0.2}]})");
  r = cli("synth " + (d / "spec.json").string() + " " + (d / "corpus.jsonl").string(), d);
  REQUIRE(r.code == 0);

  r = cli("degender " + (d / "corpus.jsonl").string() + " " + (d / "edg.jsonl").string() + " --trace " +
              (d / "trace.jsonl").string(),
          d);
  REQUIRE(r.code == 0);
  std::istringstream trace(read_file(d / "trace.jsonl"));
  std::string line;
  std::size_t n = 0;
  while (std::getline(trace, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["span"].size() == 2);
    CHECK(j["span"][0].get<std::size_t>() < j["span"][1].get<std::size_t>());
    CHECK(j.contains("original"));
    CHECK(j.contains("replacement"));
    ++n;
  }
  CHECK(n > 0);

  write_file(d / "audit.conf",
             "seed = 9\n[tfidf]\nmin_count = 5\n[shap]\nmin_support = 5\nsample_letters = 40\nsamples = 100\n"
             "[flips]\nruns = 3\n");
  r = cli("audit " + (d / "corpus.jsonl").string() + " " + (d / "out").string() + " --config " +
              (d / "audit.conf").string(),
          d);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"corpus_split.jsonl", "model_baseline.json", "corpus_edg.jsonl", "model_edg.json",
                        "corpus_edg_shap.jsonl", "model_edg_shap.json", "corpus_edg_tfidf.jsonl",
                        "model_edg_tfidf.json", "audit_report.json", "audit_report.md", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(d / "out" / f), f);
  }
  const auto manifest = nlohmann::json::parse(read_file(d / "out" / "manifest.json"));
  CHECK(manifest["status"] == "complete");

  // The saved models score the saved corpora.
  r = cli("eval " + (d / "out" / "model_edg.json").string() + " " + (d / "out" / "corpus_edg.jsonl").string() + " " +
              (d / "eval.json").string(),
          d);
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(read_file(d / "out" / "audit_report.json"));
  const auto eval = nlohmann::json::parse(read_file(d / "eval.json"));
  CHECK(eval["accuracy"] == report["stages"][1]["eval"]["accuracy"]);
}
