#include "leakaudit/config.hpp"

#include <charconv>
#include <cmath>

#include "leakaudit/error.hpp"
#include "leakaudit/text.hpp"

namespace leakaudit {

std::string_view to_string(LetterSet s) {
  switch (s) {
    case LetterSet::all: return "all";
    case LetterSet::train: return "train";
    case LetterSet::val: return "val";
    case LetterSet::test: return "test";
  }
  return "all";
}

LetterSet parse_letter_set(std::string_view s) {
  if (s == "all") return LetterSet::all;
  if (s == "train") return LetterSet::train;
  if (s == "val") return LetterSet::val;
  if (s == "test") return LetterSet::test;
  throw UsageError("unknown letter set '" + std::string(s) + "' (expected all, train, val or test)");
}

Corpus select_letters(const Corpus& corpus, LetterSet set) {
  switch (set) {
    case LetterSet::all: return corpus;
    case LetterSet::train: return corpus.subset(Split::train);
    case LetterSet::val: return corpus.subset(Split::val);
    case LetterSet::test: return corpus.subset(Split::test);
  }
  return corpus;
}

void AuditConfig::validate() const {
  const double sum = split.train + split.val + split.test;
  if (split.train <= 0 || split.val < 0 || split.test <= 0 || std::abs(sum - 1.0) > 1e-9) {
    throw UsageError("split ratios must be non-negative, with train and test positive, and sum to 1");
  }
  train.validate();
  if (vocab_min_count == 0) throw UsageError("model.vocab_min_count must be >= 1");
  if (tfidf.top_k == 0 || shap.top_k == 0) throw UsageError("top_k must be >= 1");
  if (shap.n_samples == 0) throw UsageError("shap.samples must be >= 1");
  if (mask_symbol.empty()) throw UsageError("mask.symbol is empty");
  if (mask_pos_groups.empty()) throw UsageError("mask.pos_groups is empty");
  if (flip_runs == 0) throw UsageError("flips.runs must be >= 1");
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::string section;
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      const auto close = value.find('"', 1);
      if (close == std::string_view::npos) throw ParseError(line_no, "unterminated string");
      value = value.substr(1, close - 1);
    } else if (const auto hash = value.find('#'); hash != std::string_view::npos) {
      value = trim(value.substr(0, hash));
    }
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (!section.empty()) key = section + "." + key;
    out[key] = std::string(value);
  }
  return out;
}

namespace {

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw UsageError("setting " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw UsageError("setting " + key + " expects a number, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("setting " + key + " expects true or false, got '" + v + "'");
}

std::string render(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void apply_settings(AuditConfig& c, const std::map<std::string, std::string>& settings) {
  for (const auto& [key, v] : settings) {
    if (key == "seed") c.seed = to_unsigned(key, v);
    else if (key == "split.train") c.split.train = to_double(key, v);
    else if (key == "split.val") c.split.val = to_double(key, v);
    else if (key == "split.test") c.split.test = to_double(key, v);
    else if (key == "model.kind") c.train.kind = parse_model_kind(v);
    else if (key == "model.learning_rate") c.train.learning_rate = to_double(key, v);
    else if (key == "model.epochs") c.train.epochs = to_unsigned(key, v);
    else if (key == "model.l2") c.train.l2 = to_double(key, v);
    else if (key == "model.batch_size") c.train.batch_size = to_unsigned(key, v);
    else if (key == "model.patience") c.train.patience = to_unsigned(key, v);
    else if (key == "model.class_weighting") c.train.class_weighting = to_bool(key, v);
    else if (key == "model.threshold") c.train.threshold = to_double(key, v);
    else if (key == "model.vocab_min_count") c.vocab_min_count = to_unsigned(key, v);
    else if (key == "tfidf.top_k") c.tfidf.top_k = to_unsigned(key, v);
    else if (key == "tfidf.min_count") c.tfidf.min_count = to_unsigned(key, v);
    else if (key == "tfidf.letters") c.tfidf_letters = parse_letter_set(v);
    else if (key == "shap.min_support") c.shap.min_support = to_unsigned(key, v);
    else if (key == "shap.top_k") c.shap.top_k = to_unsigned(key, v);
    else if (key == "shap.samples") c.shap.n_samples = to_unsigned(key, v);
    else if (key == "shap.exact_cap") c.shap.exact_cap = to_unsigned(key, v);
    else if (key == "shap.background_size") c.shap.background_size = to_unsigned(key, v);
    else if (key == "shap.letters") c.shap_letters = parse_letter_set(v);
    else if (key == "shap.sample_letters") {
      const auto n = to_unsigned(key, v);
      c.shap.sample_size = n == 0 ? std::nullopt : std::optional<std::size_t>(n);
    } else if (key == "mask.symbol") c.mask_symbol = v;
    else if (key == "mask.pos_groups") {
      c.mask_pos_groups.clear();
      for (auto part : split(v, ',')) {
        if (!trim(part).empty()) c.mask_pos_groups.insert(std::string(trim(part)));
      }
    } else if (key == "flips.runs") c.flip_runs = to_unsigned(key, v);
    else if (key == "flips.subset_rule") c.flip_subset_rule = parse_subset_rule(v);
    else if (key == "flips.letters") c.flip_letters = parse_letter_set(v);
    else throw UsageError("unknown setting '" + key + "'");
  }
  c.shap.mask_symbol = c.mask_symbol;
}

AuditConfig load_audit_config(const std::filesystem::path& path, AuditConfig base) {
  apply_settings(base, parse_key_values(read_file(path)));
  base.validate();
  return base;
}

std::map<std::string, std::string> describe(const AuditConfig& c) {
  std::string groups;
  for (const auto& g : c.mask_pos_groups) groups += (groups.empty() ? "" : ",") + g;
  return {
      {"seed", std::to_string(c.seed)},
      {"split.train", render(c.split.train)},
      {"split.val", render(c.split.val)},
      {"split.test", render(c.split.test)},
      {"model.kind", std::string(to_string(c.train.kind))},
      {"model.learning_rate", render(c.train.learning_rate)},
      {"model.epochs", std::to_string(c.train.epochs)},
      {"model.l2", render(c.train.l2)},
      {"model.batch_size", std::to_string(c.train.batch_size)},
      {"model.patience", std::to_string(c.train.patience)},
      {"model.class_weighting", c.train.class_weighting ? "true" : "false"},
      {"model.threshold", render(c.train.threshold)},
      {"model.vocab_min_count", std::to_string(c.vocab_min_count)},
      {"tfidf.top_k", std::to_string(c.tfidf.top_k)},
      {"tfidf.min_count", std::to_string(c.tfidf.min_count)},
      {"tfidf.letters", std::string(to_string(c.tfidf_letters))},
      {"shap.min_support", std::to_string(c.shap.min_support)},
      {"shap.top_k", std::to_string(c.shap.top_k)},
      {"shap.samples", std::to_string(c.shap.n_samples)},
      {"shap.exact_cap", std::to_string(c.shap.exact_cap)},
      {"shap.background_size", std::to_string(c.shap.background_size)},
      {"shap.letters", std::string(to_string(c.shap_letters))},
      {"shap.sample_letters", std::to_string(c.shap.sample_size.value_or(0))},
      {"mask.symbol", c.mask_symbol},
      {"mask.pos_groups", groups},
      {"flips.runs", std::to_string(c.flip_runs)},
      {"flips.subset_rule", std::string(to_string(c.flip_subset_rule))},
      {"flips.letters", std::string(to_string(c.flip_letters))},
  };
}

}  // namespace leakaudit
