#pragma once

#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "leakaudit/corpus.hpp"
#include "leakaudit/features.hpp"
#include "leakaudit/lexicon.hpp"

namespace leakaudit {

struct Replacement {
  std::size_t begin = 0;  // byte span in the original text
  std::size_t end = 0;
  std::string original;
  std::string replacement;
};

struct EdgResult {
  std::string text;
  std::vector<Replacement> replacements;
  std::vector<std::string> warnings;
};

// Explicit de-gendering: every male-term variant becomes the matching
// variant of its female counterpart, keeping casing and suffixes.
EdgResult apply_edg(std::string_view text, const Lexicon& lexicon);

// Rebuilds the output of apply_edg from the original text and its
// replacement log.
std::string apply_replacements(std::string_view original, const std::vector<Replacement>& replacements);

struct MaskPlan {
  std::set<std::string> tokens;
  std::string mask_symbol = "[MASK]";
  bool match_casing = false;

  // Throws UsageError when tokens is empty, the symbol is empty, or the
  // symbol is itself one of the tokens.
  void validate() const;
  static MaskPlan make(std::set<std::string> tokens, std::string mask_symbol = "[MASK]",
                       bool match_casing = false);
};

// Tokenizer used to locate whole-word occurrences for masking: the default
// tokenizer with the plan's mask symbol added to the reserved set.
Tokenizer mask_tokenizer(const MaskPlan& plan, const Tokenizer& base = {});

std::string apply_mask(std::string_view text, const MaskPlan& plan);

// Without a trace sink, fallback warnings go to std::clog.
using EdgTraceSink = std::function<void(const Letter&, const EdgResult&)>;

Corpus degender_corpus(const Corpus& corpus, const Lexicon& lexicon, const EdgTraceSink& trace = {});
Corpus mask_corpus(const Corpus& corpus, const MaskPlan& plan);

}  // namespace leakaudit
