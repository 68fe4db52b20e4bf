#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "leakaudit/corpus.hpp"

namespace leakaudit {

// Anonymization placeholders plus the two mask symbols.
const std::set<std::string>& default_reserved_tokens();

struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string token;  // normalized (lowercased unless reserved)
};

// Word-level tokenizer. A word is a maximal run of ASCII alphanumerics and
// non-ASCII bytes; every other byte separates words and is dropped. Reserved
// tokens are matched verbatim first and never split or lowercased.
struct Tokenizer {
  bool lowercase = true;
  std::set<std::string> reserved = default_reserved_tokens();
  std::size_t max_tokens = 512;

  std::vector<std::string> tokenize(std::string_view text) const;
  // All token spans, without truncation.
  std::vector<TokenSpan> spans(std::string_view text) const;
  bool is_reserved(std::string_view token) const { return reserved.contains(std::string(token)); }
};

class Vocabulary {
 public:
  Vocabulary() = default;

  // Tokens with corpus frequency >= min_count, ordered by frequency
  // descending then lexicographically. Reserved tokens (placeholders, mask
  // symbols) are never features: a masked letter must not carry a count of
  // what was hidden. Throws DataError when nothing survives.
  static Vocabulary build(const Corpus& corpus, const Tokenizer& tokenizer, std::size_t min_count);
  // Rebuilds a vocabulary from a stored token list (statistics zeroed).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& token(std::size_t index) const { return tokens_[index]; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<std::size_t> find(std::string_view token) const;
  std::size_t doc_frequency(std::size_t index) const { return doc_freq_[index]; }
  std::size_t total_count(std::size_t index) const { return total_count_[index]; }
  // FNV-1a over the newline-joined token list, as 16 hex digits.
  std::string hash() const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && doc_freq_ == other.doc_freq_ &&
           total_count_ == other.total_count_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> doc_freq_;
  std::vector<std::size_t> total_count_;
};

struct DocVector {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;  // (index, count), index ascending
  Gender label = Gender::female;
};

DocVector vectorize(std::string_view text, const Tokenizer& tokenizer, const Vocabulary& vocab);
DocVector vectorize(const Letter& letter, const Tokenizer& tokenizer, const Vocabulary& vocab);

// token -> part-of-speech tag; unknown tokens map to "other".
class PosLexicon {
 public:
  PosLexicon() = default;
  explicit PosLexicon(std::map<std::string, std::string> tags) : tags_(std::move(tags)) {}

  std::string tag(std::string_view token) const;
  const std::map<std::string, std::string>& tags() const { return tags_; }

 private:
  std::map<std::string, std::string> tags_;
};

PosLexicon parse_pos_lexicon(std::istream& in);
PosLexicon load_pos_lexicon(const std::filesystem::path& path);
const PosLexicon& default_pos_lexicon();

// Canonical ordering of POS groups in reports: adjective, noun, verb, then
// any remaining tags alphabetically.
std::vector<std::string> ordered_pos_groups(const std::set<std::string>& tags);

struct TfidfRow {
  std::string token;
  std::string pos;
  double score_female = 0.0;
  double score_male = 0.0;
  double diff = 0.0;  // score_male - score_female
  std::size_t count = 0;  // occurrences across both aggregate documents
};

struct TfidfTable {
  std::string pos;
  Gender direction = Gender::male;  // male: diff > 0, female: diff < 0
  std::vector<TfidfRow> rows;
};

struct TfidfOptions {
  std::size_t top_k = 10;
  std::size_t min_count = 20;
};

struct TfidfReport {
  std::vector<TfidfRow> rows;  // every token, sorted by token
  std::vector<TfidfTable> tables;
  std::size_t female_tokens = 0;
  std::size_t male_tokens = 0;
  TfidfOptions options;

  // Union of table tokens for the given POS groups (all groups when empty).
  std::set<std::string> selected_tokens(const std::set<std::string>& pos_groups = {}) const;
};

// Aggregates each class into one document and scores
// tf = count / doc_total, idf = ln((1 + 2) / (1 + df)) + 1, then
// L2-normalizes each document's score vector.
TfidfReport gender_tfidf(const Corpus& corpus, const Tokenizer& tokenizer, const PosLexicon& pos,
                         const TfidfOptions& options = {});

}  // namespace leakaudit
