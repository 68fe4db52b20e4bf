#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "leakaudit/text.hpp"

namespace leakaudit {

// 0 = female, 1 = male, matching the corpus label encoding.
enum class Gender : int { female = 0, male = 1 };

std::string_view to_string(Gender g);
Gender parse_gender(std::string_view s);
inline Gender opposite(Gender g) { return g == Gender::male ? Gender::female : Gender::male; }

enum class TermCategory { pronoun, title, kinship, role, other };
enum class TermPos { noun, verb, adjective, pronoun, other };

std::string_view to_string(TermCategory c);
std::string_view to_string(TermPos p);

struct GenderedTerm {
  std::string surface;      // lowercase, no whitespace
  Gender gender = Gender::male;
  std::string counterpart;  // opposite-gender surface, present in the lexicon
  TermCategory category = TermCategory::other;
  TermPos pos = TermPos::other;

  bool operator==(const GenderedTerm&) const = default;
};

enum class VariantKind {
  bare,
  plural,             // brother -> brothers, actress -> actresses
  possessive,         // brother's
  plural_possessive,  // brothers'
  contraction,        // he's, he'd, he'll
  verb_inflection,    // fathered, fathering
};

std::string_view to_string(VariantKind k);

// One surface variant of a term. `pattern` is an ECMAScript regex anchored on
// word boundaries that accepts the base form and this variant in the three
// generated casings; `forms` lists exactly the variant strings it accepts
// beyond the base. Matching itself runs on the literal forms.
struct VariantRule {
  std::string base;
  VariantKind kind = VariantKind::bare;
  std::string variant;           // lowercase variant form, e.g. "brothers"
  std::string counterpart_form;  // lowercase counterpart variant, e.g. "sisters"
  bool counterpart_fallback = false;  // counterpart_form = counterpart + raw suffix
  std::string pattern;
  std::vector<std::string> forms;  // variant in lower, Title, UPPER casing
  GenderedTerm canonical;
};

// Expands a term into its surface variants. Total; the first rule is always
// the bare form.
std::vector<VariantRule> expand_variants(const GenderedTerm& term);

// Morphological plural for lowercase nouns; empty when the word does not end
// in a letter.
std::string pluralize(std::string_view noun);

struct LexiconMatch {
  std::size_t begin = 0;  // byte offsets into the scanned text
  std::size_t end = 0;
  GenderedTerm term;
  std::string matched_surface;
  VariantKind kind = VariantKind::bare;
  Casing casing = Casing::lower;
  std::size_t rule = 0;  // index into Lexicon::rules()
};

class Lexicon {
 public:
  Lexicon() = default;

  // Validates surface shape, duplicate surfaces and counterpart closure.
  static Lexicon from_terms(std::vector<GenderedTerm> terms, std::string version);

  const std::vector<GenderedTerm>& terms() const { return terms_; }
  const std::vector<VariantRule>& rules() const { return rules_; }
  const std::string& version() const { return version_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  const GenderedTerm* find(std::string_view surface) const;

  // Non-overlapping, sorted, word-boundary-aligned matches. Longest match
  // wins; leftmost wins between overlapping candidates.
  std::vector<LexiconMatch> match_all(std::string_view text) const;

 private:
  struct FormEntry {
    std::size_t rule;
    Casing casing;
  };

  void build_index();

  std::vector<GenderedTerm> terms_;
  std::vector<VariantRule> rules_;
  std::unordered_map<std::string, std::size_t> by_surface_;
  std::unordered_map<std::string, FormEntry> forms_;
  std::size_t max_form_length_ = 0;
  std::string version_;
};

// TSV: surface, gender, counterpart, category, pos. '#' lines are comments;
// a "# version: X" comment sets the version.
Lexicon parse_lexicon(std::istream& in, std::string default_version);
Lexicon load_lexicon(const std::filesystem::path& path);
const Lexicon& default_lexicon();

std::vector<LexiconMatch> match_all(std::string_view text, const Lexicon& lexicon);

}  // namespace leakaudit
