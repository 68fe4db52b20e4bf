#include "leakaudit/features.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "leakaudit/error.hpp"
#include "leakaudit/random.hpp"
#include "leakaudit/text.hpp"

namespace leakaudit {

namespace embedded {
std::string_view default_pos_lexicon_tsv();
}

namespace {

bool is_token_byte(unsigned char c) { return is_ascii_alnum(static_cast<char>(c)) || c >= 0x80; }

// Length of a Unicode separator (curly quotes, dashes, ellipsis, nbsp)
// starting at i, or 0.
std::size_t unicode_separator_length(std::string_view text, std::size_t i) {
  const auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  if (i + 1 < text.size() && at(i) == 0xC2 && at(i + 1) == 0xA0) return 2;
  if (i + 2 < text.size() && at(i) == 0xE2 && at(i + 1) == 0x80) {
    switch (at(i + 2)) {
      case 0x93: case 0x94: case 0x98: case 0x99: case 0x9C: case 0x9D: case 0xA6:
        return 3;
      default:
        break;
    }
  }
  return 0;
}

bool is_word_at(std::string_view text, std::size_t i) {
  return is_token_byte(static_cast<unsigned char>(text[i])) && unicode_separator_length(text, i) == 0;
}

}  // namespace

const std::set<std::string>& default_reserved_tokens() {
  static const std::set<std::string> reserved = {"FIRST_NAME", "MIDDLE_NAME", "LAST_NAME",
                                                 "IDENTIFIER", "[MASK]",      "[UNK]"};
  return reserved;
}

std::vector<TokenSpan> Tokenizer::spans(std::string_view text) const {
  std::vector<TokenSpan> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const std::string* best = nullptr;
    for (const auto& r : reserved) {
      if (r.empty() || r.size() <= (best ? best->size() : 0)) continue;
      if (text.compare(i, r.size(), r) != 0) continue;
      const std::size_t end = i + r.size();
      if (is_token_byte(static_cast<unsigned char>(r.front())) && i > 0 && is_word_at(text, i - 1)) continue;
      if (is_token_byte(static_cast<unsigned char>(r.back())) && end < n && is_word_at(text, end)) continue;
      best = &r;
    }
    if (best != nullptr) {
      out.push_back({i, i + best->size(), *best});
      i += best->size();
      continue;
    }
    if (!is_word_at(text, i)) {
      const std::size_t sep = unicode_separator_length(text, i);
      i += sep ? sep : 1;
      continue;
    }
    std::size_t j = i;
    while (j < n && is_word_at(text, j)) ++j;
    std::string token(text.substr(i, j - i));
    if (lowercase) token = ascii_lower(token);
    out.push_back({i, j, std::move(token)});
    i = j;
  }
  return out;
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  auto sp = spans(text);
  if (sp.size() > max_tokens) sp.resize(max_tokens);
  std::vector<std::string> tokens;
  tokens.reserve(sp.size());
  for (auto& s : sp) tokens.push_back(std::move(s.token));
  return tokens;
}

Vocabulary Vocabulary::build(const Corpus& corpus, const Tokenizer& tokenizer, std::size_t min_count) {
  if (corpus.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> stats;  // total, df
  for (const auto& letter : corpus.letters) {
    auto tokens = tokenizer.tokenize(letter.text);
    std::sort(tokens.begin(), tokens.end());
    for (std::size_t i = 0; i < tokens.size();) {
      std::size_t j = i;
      while (j < tokens.size() && tokens[j] == tokens[i]) ++j;
      auto& s = stats[tokens[i]];
      s.first += j - i;
      s.second += 1;
      i = j;
    }
  }
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> kept;
  for (auto& [token, s] : stats) {
    if (tokenizer.is_reserved(token)) continue;
    if (s.first >= std::max<std::size_t>(min_count, 1)) kept.emplace_back(token, s);
  }
  if (kept.empty()) {
    throw DataError("vocabulary is empty after filtering with min_count=" + std::to_string(min_count));
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.first < b.first;
  });
  Vocabulary v;
  for (auto& [token, s] : kept) {
    v.index_.emplace(token, v.tokens_.size());
    v.tokens_.push_back(token);
    v.total_count_.push_back(s.first);
    v.doc_freq_.push_back(s.second);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  Vocabulary v;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!v.index_.emplace(tokens[i], i).second) throw DataError("duplicate vocabulary token '" + tokens[i] + "'");
  }
  v.tokens_ = std::move(tokens);
  v.doc_freq_.assign(v.tokens_.size(), 0);
  v.total_count_.assign(v.tokens_.size(), 0);
  return v;
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::hash() const {
  std::uint64_t h = fnv1a64("");
  for (const auto& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64("\n", h);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DocVector vectorize(std::string_view text, const Tokenizer& tokenizer, const Vocabulary& vocab) {
  std::vector<std::uint32_t> ids;
  for (const auto& t : tokenizer.tokenize(text)) {
    if (auto idx = vocab.find(t)) ids.push_back(static_cast<std::uint32_t>(*idx));
  }
  std::sort(ids.begin(), ids.end());
  DocVector v;
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    v.entries.emplace_back(ids[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return v;
}

DocVector vectorize(const Letter& letter, const Tokenizer& tokenizer, const Vocabulary& vocab) {
  DocVector v = vectorize(letter.text, tokenizer, vocab);
  v.label = letter.gender;
  return v;
}

std::string PosLexicon::tag(std::string_view token) const {
  auto it = tags_.find(ascii_lower(token));
  return it == tags_.end() ? "other" : it->second;
}

PosLexicon parse_pos_lexicon(std::istream& in) {
  std::map<std::string, std::string> tags;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw ParseError(line_no, "expected token<TAB>pos");
    std::string token = ascii_lower(trim(fields[0]));
    std::string pos = ascii_lower(trim(fields[1]));
    if (token.empty() || pos.empty()) throw ParseError(line_no, "empty token or pos");
    tags[token] = pos;
  }
  return PosLexicon(std::move(tags));
}

PosLexicon load_pos_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open POS lexicon '" + path.string() + "'");
  return parse_pos_lexicon(in);
}

const PosLexicon& default_pos_lexicon() {
  static const PosLexicon lex = [] {
    std::istringstream in{std::string(embedded::default_pos_lexicon_tsv())};
    return parse_pos_lexicon(in);
  }();
  return lex;
}

std::vector<std::string> ordered_pos_groups(const std::set<std::string>& tags) {
  std::vector<std::string> out;
  for (const char* primary : {"adjective", "noun", "verb"}) {
    if (tags.contains(primary)) out.emplace_back(primary);
  }
  for (const auto& t : tags) {
    if (t != "adjective" && t != "noun" && t != "verb") out.push_back(t);
  }
  return out;
}

}  // namespace leakaudit
