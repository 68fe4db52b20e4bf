#include "leakaudit/degender.hpp"

#include <iostream>

#include "leakaudit/error.hpp"

namespace leakaudit {

EdgResult apply_edg(std::string_view text, const Lexicon& lexicon) {
  EdgResult result;
  std::size_t cursor = 0;
  for (const auto& m : lexicon.match_all(text)) {
    if (m.term.gender != Gender::male) continue;
    const VariantRule& rule = lexicon.rules()[m.rule];
    std::string replacement = apply_casing(rule.counterpart_form, m.casing);
    if (rule.counterpart_fallback) {
      result.warnings.push_back("no regular " + std::string(to_string(rule.kind)) + " form for '" +
                                rule.canonical.counterpart + "'; used '" + replacement + "'");
    }
    result.text.append(text.substr(cursor, m.begin - cursor));
    result.text += replacement;
    result.replacements.push_back({m.begin, m.end, m.matched_surface, std::move(replacement)});
    cursor = m.end;
  }
  result.text.append(text.substr(cursor));
  return result;
}

std::string apply_replacements(std::string_view original, const std::vector<Replacement>& replacements) {
  std::string out;
  std::size_t cursor = 0;
  for (const auto& r : replacements) {
    if (r.begin < cursor || r.end > original.size() || original.substr(r.begin, r.end - r.begin) != r.original) {
      throw InvariantError("replacement log does not align with the original text");
    }
    out.append(original.substr(cursor, r.begin - cursor));
    out += r.replacement;
    cursor = r.end;
  }
  out.append(original.substr(cursor));
  return out;
}

void MaskPlan::validate() const {
  if (tokens.empty()) throw UsageError("mask plan has no tokens");
  if (mask_symbol.empty()) throw UsageError("mask symbol is empty");
  if (tokens.contains(mask_symbol) || (!match_casing && tokens.contains(ascii_lower(mask_symbol)))) {
    throw UsageError("mask symbol '" + mask_symbol + "' is itself a masked token");
  }
  for (const auto& t : tokens) {
    if (t.empty()) throw UsageError("mask plan contains an empty token");
  }
}

MaskPlan MaskPlan::make(std::set<std::string> tokens, std::string mask_symbol, bool match_casing) {
  MaskPlan plan;
  for (const auto& t : tokens) plan.tokens.insert(match_casing ? t : ascii_lower(t));
  plan.mask_symbol = std::move(mask_symbol);
  plan.match_casing = match_casing;
  plan.validate();
  return plan;
}

Tokenizer mask_tokenizer(const MaskPlan& plan, const Tokenizer& base) {
  Tokenizer t = base;
  t.lowercase = false;
  t.reserved.insert(plan.mask_symbol);
  return t;
}

std::string apply_mask(std::string_view text, const MaskPlan& plan) {
  plan.validate();
  const Tokenizer tokenizer = mask_tokenizer(plan);
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const auto& span : tokenizer.spans(text)) {
    const bool hit = plan.match_casing ? plan.tokens.contains(span.token)
                                       : plan.tokens.contains(ascii_lower(span.token));
    if (!hit) continue;
    out.append(text.substr(cursor, span.begin - cursor));
    out += plan.mask_symbol;
    cursor = span.end;
  }
  out.append(text.substr(cursor));
  return out;
}

Corpus degender_corpus(const Corpus& corpus, const Lexicon& lexicon, const EdgTraceSink& trace) {
  Corpus out;
  out.provenance = Provenance::edg;
  out.letters.reserve(corpus.size());
  for (const auto& letter : corpus.letters) {
    EdgResult r = apply_edg(letter.text, lexicon);
    if (trace) {
      trace(letter, r);
    } else {
      for (const auto& w : r.warnings) std::clog << "warning: " << letter.id << ": " << w << '\n';
    }
    Letter l = letter;
    l.text = std::move(r.text);
    out.letters.push_back(std::move(l));
  }
  return out;
}

Corpus mask_corpus(const Corpus& corpus, const MaskPlan& plan) {
  plan.validate();
  Corpus out;
  out.provenance = Provenance::masked;
  out.letters.reserve(corpus.size());
  for (const auto& letter : corpus.letters) {
    Letter l = letter;
    l.text = apply_mask(letter.text, plan);
    out.letters.push_back(std::move(l));
  }
  return out;
}

}  // namespace leakaudit
