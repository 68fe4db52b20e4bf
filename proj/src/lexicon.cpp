#include "leakaudit/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "leakaudit/error.hpp"

namespace leakaudit {

namespace embedded {
std::string_view default_lexicon_tsv();
}

namespace {

bool is_word_byte(char c) { return is_ascii_alnum(c) || c == '_'; }

std::string regex_escape(std::string_view s) {
  static constexpr std::string_view special = R"(\^$.|?*+()[]{}/)";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string_view::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

std::vector<std::string> casings_of(std::string_view lower_form) {
  std::vector<std::string> out;
  for (Casing c : {Casing::lower, Casing::title, Casing::upper}) {
    std::string f = apply_casing(lower_form, c);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(std::move(f));
  }
  return out;
}

std::string build_pattern(const std::vector<std::string>& variant_forms, std::string_view base) {
  std::vector<std::string> alternatives = variant_forms;
  for (auto& f : casings_of(base)) {
    if (std::find(alternatives.begin(), alternatives.end(), f) == alternatives.end()) {
      alternatives.push_back(std::move(f));
    }
  }
  // ECMAScript alternation is ordered, so longer forms go first.
  std::stable_sort(alternatives.begin(), alternatives.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  std::string pattern = "\\b(?:";
  for (std::size_t i = 0; i < alternatives.size(); ++i) {
    if (i) pattern += '|';
    pattern += regex_escape(alternatives[i]);
  }
  pattern += ")(?![A-Za-z0-9_])";
  return pattern;
}

VariantRule make_rule(const GenderedTerm& term, VariantKind kind, std::string variant,
                      std::string counterpart_form, bool fallback) {
  VariantRule rule;
  rule.base = term.surface;
  rule.kind = kind;
  rule.variant = std::move(variant);
  rule.counterpart_form = std::move(counterpart_form);
  rule.counterpart_fallback = fallback;
  rule.forms = casings_of(rule.variant);
  rule.pattern = build_pattern(rule.forms, term.surface);
  rule.canonical = term;
  return rule;
}

std::string plural_possessive(std::string_view plural, std::string_view apostrophe) {
  std::string out(plural);
  if (ends_with(plural, "s")) {
    out += apostrophe;
  } else {
    out += apostrophe;
    out += 's';
  }
  return out;
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::pair<std::string_view, Enum> (&table)[N],
                std::size_t line, std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw ParseError(line, "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

constexpr std::pair<std::string_view, TermCategory> kCategories[] = {
    {"pronoun", TermCategory::pronoun}, {"title", TermCategory::title},
    {"kinship", TermCategory::kinship}, {"role", TermCategory::role},
    {"other", TermCategory::other}};

constexpr std::pair<std::string_view, TermPos> kPos[] = {
    {"noun", TermPos::noun},       {"verb", TermPos::verb},   {"adjective", TermPos::adjective},
    {"pronoun", TermPos::pronoun}, {"other", TermPos::other}};

constexpr std::pair<std::string_view, Gender> kGenders[] = {{"female", Gender::female},
                                                            {"male", Gender::male}};

constexpr std::string_view kApostrophes[] = {"'", "\xE2\x80\x99"};

}  // namespace

std::string_view to_string(Gender g) { return g == Gender::male ? "male" : "female"; }

Gender parse_gender(std::string_view s) {
  if (s == "male" || s == "1" || s == "m" || s == "M") return Gender::male;
  if (s == "female" || s == "0" || s == "f" || s == "F") return Gender::female;
  throw DataError("unknown gender '" + std::string(s) + "'");
}

std::string_view to_string(TermCategory c) {
  for (const auto& [name, value] : kCategories) {
    if (value == c) return name;
  }
  return "other";
}

std::string_view to_string(TermPos p) {
  for (const auto& [name, value] : kPos) {
    if (value == p) return name;
  }
  return "other";
}

std::string_view to_string(VariantKind k) {
  switch (k) {
    case VariantKind::bare: return "bare";
    case VariantKind::plural: return "plural";
    case VariantKind::possessive: return "possessive";
    case VariantKind::plural_possessive: return "plural_possessive";
    case VariantKind::contraction: return "contraction";
    case VariantKind::verb_inflection: return "verb_inflection";
  }
  return "bare";
}

std::string pluralize(std::string_view noun) {
  if (noun.empty() || !(noun.back() >= 'a' && noun.back() <= 'z')) return {};
  static const std::set<std::string_view> not_man_compounds = {"human", "german", "roman",
                                                               "shaman", "talisman"};
  if (noun == "child") return "children";
  if (noun == "person") return "people";
  if (ends_with(noun, "man") && !not_man_compounds.contains(noun)) {
    return std::string(noun.substr(0, noun.size() - 3)) + "men";
  }
  if (ends_with(noun, "fe")) return std::string(noun.substr(0, noun.size() - 2)) + "ves";
  if (ends_with(noun, "s") || ends_with(noun, "x") || ends_with(noun, "z") ||
      ends_with(noun, "ch") || ends_with(noun, "sh")) {
    return std::string(noun) + "es";
  }
  if (noun.size() >= 2 && noun.back() == 'y' && !is_vowel(noun[noun.size() - 2])) {
    return std::string(noun.substr(0, noun.size() - 1)) + "ies";
  }
  return std::string(noun) + "s";
}

std::vector<VariantRule> expand_variants(const GenderedTerm& term) {
  std::vector<VariantRule> rules;
  rules.push_back(make_rule(term, VariantKind::bare, term.surface, term.counterpart, false));

  const bool noun_like = term.pos == TermPos::noun && term.category != TermCategory::title;
  if (noun_like) {
    const std::string plural = pluralize(term.surface);
    std::string cp_plural = pluralize(term.counterpart);
    bool fallback = false;
    if (cp_plural.empty()) {
      // Counterpart has no regular plural: reuse the male suffix verbatim.
      fallback = true;
      cp_plural = term.counterpart + plural.substr(std::min(plural.size(), term.surface.size()));
    }
    if (!plural.empty() && plural != term.surface) {
      rules.push_back(make_rule(term, VariantKind::plural, plural, cp_plural, fallback));
      for (std::string_view apo : kApostrophes) {
        rules.push_back(make_rule(term, VariantKind::plural_possessive,
                                  plural_possessive(plural, apo),
                                  plural_possessive(cp_plural, apo), fallback));
      }
    }
    for (std::string_view apo : kApostrophes) {
      std::string suffix = std::string(apo) + "s";
      rules.push_back(make_rule(term, VariantKind::possessive, term.surface + suffix,
                                term.counterpart + suffix, false));
    }
  }
  if (term.pos == TermPos::pronoun || term.category == TermCategory::pronoun) {
    for (std::string_view apo : kApostrophes) {
      for (std::string_view tail : {"s", "d", "ll"}) {
        std::string suffix = std::string(apo) + std::string(tail);
        rules.push_back(make_rule(term, VariantKind::contraction, term.surface + suffix,
                                  term.counterpart + suffix, false));
      }
    }
  }
  if (term.pos == TermPos::verb) {
    for (std::string_view tail : {"s", "ed", "ing"}) {
      rules.push_back(make_rule(term, VariantKind::verb_inflection, term.surface + std::string(tail),
                                term.counterpart + std::string(tail), false));
    }
  }
  return rules;
}

Lexicon Lexicon::from_terms(std::vector<GenderedTerm> terms, std::string version) {
  Lexicon lex;
  lex.version_ = std::move(version);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if (t.surface.empty()) throw DataError("lexicon term " + std::to_string(i) + " has empty surface");
    for (const std::string* s : {&t.surface, &t.counterpart}) {
      if (s->empty()) throw DataError("term '" + t.surface + "' has empty counterpart");
      if (ascii_lower(*s) != *s) throw DataError("term '" + *s + "' is not lowercase");
      if (s->find_first_of(" \t\r\n") != std::string::npos) {
        throw DataError("term '" + *s + "' contains whitespace");
      }
    }
    if (!lex.by_surface_.emplace(t.surface, i).second) {
      throw DataError("duplicate lexicon surface '" + t.surface + "'");
    }
  }
  lex.terms_ = std::move(terms);
  for (const auto& t : lex.terms_) {
    const GenderedTerm* cp = lex.find(t.counterpart);
    if (cp == nullptr) {
      throw DataError("orphan term '" + t.surface + "': counterpart '" + t.counterpart +
                      "' is not in the lexicon");
    }
    if (cp->gender == t.gender) {
      throw DataError("orphan term '" + t.surface + "': counterpart '" + t.counterpart +
                      "' has the same gender");
    }
  }
  lex.build_index();
  return lex;
}

void Lexicon::build_index() {
  rules_.clear();
  forms_.clear();
  std::vector<VariantRule> derived;
  for (const auto& t : terms_) {
    auto rules = expand_variants(t);
    rules_.push_back(std::move(rules.front()));
    for (std::size_t r = 1; r < rules.size(); ++r) derived.push_back(std::move(rules[r]));
  }
  // Bare surfaces are indexed before derived variants so an explicit entry
  // ("men") always wins over a generated one (plural of "man").
  for (auto& r : derived) rules_.push_back(std::move(r));
  max_form_length_ = 0;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    for (Casing c : {Casing::lower, Casing::title, Casing::upper}) {
      std::string form = apply_casing(rules_[i].variant, c);
      max_form_length_ = std::max(max_form_length_, form.size());
      forms_.try_emplace(std::move(form), FormEntry{i, c});
    }
  }
}

const GenderedTerm* Lexicon::find(std::string_view surface) const {
  auto it = by_surface_.find(std::string(surface));
  return it == by_surface_.end() ? nullptr : &terms_[it->second];
}

std::vector<LexiconMatch> Lexicon::match_all(std::string_view text) const {
  std::vector<LexiconMatch> matches;
  if (forms_.empty()) return matches;
  std::string key;
  std::vector<std::size_t> ends;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const bool starts_word = is_word_byte(text[i]) && (i == 0 || !is_word_byte(text[i - 1]));
    if (!starts_word) {
      ++i;
      continue;
    }
    ends.clear();
    const std::size_t limit = std::min(n, i + max_form_length_);
    for (std::size_t e = i + 1; e <= limit; ++e) {
      if (e == n || !is_word_byte(text[e])) ends.push_back(e);
    }
    bool matched = false;
    for (auto it = ends.rbegin(); it != ends.rend(); ++it) {
      key.assign(text.data() + i, *it - i);
      auto hit = forms_.find(key);
      if (hit == forms_.end()) continue;
      const VariantRule& rule = rules_[hit->second.rule];
      LexiconMatch m;
      m.begin = i;
      m.end = *it;
      m.term = rule.canonical;
      m.matched_surface = key;
      m.kind = rule.kind;
      m.casing = hit->second.casing;
      m.rule = hit->second.rule;
      matches.push_back(std::move(m));
      i = *it;
      matched = true;
      break;
    }
    if (!matched) {
      // Skip the rest of this word; matches only start at word starts.
      while (i < n && is_word_byte(text[i])) ++i;
    }
  }
  return matches;
}

std::vector<LexiconMatch> match_all(std::string_view text, const Lexicon& lexicon) {
  return lexicon.match_all(text);
}

Lexicon parse_lexicon(std::istream& in, std::string default_version) {
  std::vector<GenderedTerm> terms;
  std::string version = std::move(default_version);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      if (body.starts_with("version:")) version = std::string(trim(body.substr(8)));
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() != 5) {
      throw ParseError(line_no, "expected 5 tab-separated columns, found " +
                                    std::to_string(fields.size()));
    }
    GenderedTerm t;
    t.surface = std::string(trim(fields[0]));
    t.gender = parse_enum(trim(fields[1]), kGenders, line_no, "gender");
    t.counterpart = std::string(trim(fields[2]));
    t.category = parse_enum(trim(fields[3]), kCategories, line_no, "category");
    t.pos = parse_enum(trim(fields[4]), kPos, line_no, "pos");
    if (t.surface.empty() || t.counterpart.empty()) throw ParseError(line_no, "empty surface or counterpart");
    if (ascii_lower(t.surface) != t.surface || ascii_lower(t.counterpart) != t.counterpart) {
      throw ParseError(line_no, "surfaces must be lowercase");
    }
    terms.push_back(std::move(t));
  }
  return Lexicon::from_terms(std::move(terms), std::move(version));
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lexicon '" + path.string() + "'");
  return parse_lexicon(in, path.stem().string());
}

const Lexicon& default_lexicon() {
  static const Lexicon lex = [] {
    std::istringstream in{std::string(embedded::default_lexicon_tsv())};
    return parse_lexicon(in, "default");
  }();
  return lex;
}

}  // namespace leakaudit
