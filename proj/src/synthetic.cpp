#include "leakaudit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "leakaudit/error.hpp"
#include "leakaudit/features.hpp"
#include "leakaudit/random.hpp"
#include "leakaudit/text.hpp"

namespace leakaudit {

namespace {

struct Indicator {
  double p_female;
  double p_male;
};

std::vector<Indicator> indicators_of(const CueSpec& spec) {
  std::vector<Indicator> out;
  for (const auto& e : spec.explicit_terms) {
    out.push_back(e.gender == Gender::male ? Indicator{0.0, e.probability} : Indicator{e.probability, 0.0});
  }
  for (const auto& c : spec.implicit_cues) {
    out.push_back(c.gender == Gender::male ? Indicator{c.other_probability, c.probability}
                                           : Indicator{c.probability, c.other_probability});
  }
  return out;
}

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError(what + " probability must be in [0, 1]");
}

std::vector<std::string> default_filler(const CueSpec& spec) {
  std::set<std::string> excluded;
  for (const auto& e : spec.explicit_terms) excluded.insert(ascii_lower(e.surface));
  for (const auto& c : spec.implicit_cues) excluded.insert(ascii_lower(c.token));
  std::vector<std::string> out;
  for (const auto& [token, pos] : default_pos_lexicon().tags()) {
    if (!excluded.contains(token) && default_lexicon().find(token) == nullptr) out.push_back(token);
  }
  return out;
}

}  // namespace

void CueSpec::validate() const {
  if (base_vocab.empty()) throw UsageError("synthetic spec has an empty filler vocabulary");
  if (female_letters + male_letters == 0) throw UsageError("synthetic spec requests zero letters");
  if (min_length == 0 || min_length > max_length) throw UsageError("invalid letter length range");
  std::set<std::string> filler;
  for (const auto& w : base_vocab) filler.insert(ascii_lower(w));
  std::set<std::string> explicit_surfaces;
  std::size_t slots = 0;
  for (const auto& e : explicit_terms) {
    check_probability(e.probability, "explicit term '" + e.surface + "'");
    if (e.surface.empty()) throw UsageError("explicit term with empty surface");
    if (filler.contains(ascii_lower(e.surface))) {
      throw UsageError("explicit term '" + e.surface + "' also appears in the filler vocabulary");
    }
    explicit_surfaces.insert(ascii_lower(e.surface));
    slots += e.occurrences;
  }
  std::set<std::string> cue_tokens;
  for (const auto& c : implicit_cues) {
    check_probability(c.probability, "implicit cue '" + c.token + "'");
    check_probability(c.other_probability, "implicit cue '" + c.token + "'");
    const std::string t = ascii_lower(c.token);
    if (t.empty()) throw UsageError("implicit cue with empty token");
    if (filler.contains(t) || explicit_surfaces.contains(t)) {
      throw UsageError("implicit cue '" + c.token + "' overlaps explicit terms or filler vocabulary");
    }
    if (!cue_tokens.insert(t).second) throw UsageError("duplicate implicit cue '" + c.token + "'");
    slots += 1;
  }
  if (slots > min_length) throw UsageError("cue occurrences exceed the minimum letter length");
  if (explicit_terms.size() + implicit_cues.size() > 24) {
    throw UsageError("at most 24 cues are supported (closed-form Bayes accuracy enumerates 2^k patterns)");
  }
}

double bayes_accuracy(const CueSpec& spec) {
  const double total = static_cast<double>(spec.female_letters + spec.male_letters);
  if (total == 0) throw UsageError("synthetic spec requests zero letters");
  const double prior_f = static_cast<double>(spec.female_letters) / total;
  const double prior_m = static_cast<double>(spec.male_letters) / total;
  const auto ind = indicators_of(spec);
  const std::size_t k = ind.size();
  double acc = 0.0;
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << k); ++pattern) {
    double lf = prior_f;
    double lm = prior_m;
    for (std::size_t j = 0; j < k; ++j) {
      const bool present = (pattern >> j) & 1U;
      lf *= present ? ind[j].p_female : 1.0 - ind[j].p_female;
      lm *= present ? ind[j].p_male : 1.0 - ind[j].p_male;
    }
    acc += std::max(lf, lm);
  }
  return acc;
}

SyntheticCorpus generate_synthetic(const CueSpec& input) {
  CueSpec spec = input;
  if (spec.base_vocab.empty()) spec.base_vocab = default_filler(spec);
  spec.validate();

  Rng rng(spec.seed);
  const std::size_t total = spec.female_letters + spec.male_letters;
  std::vector<Gender> labels;
  labels.insert(labels.end(), spec.female_letters, Gender::female);
  labels.insert(labels.end(), spec.male_letters, Gender::male);
  rng.shuffle(std::span<Gender>(labels));

  const int width = static_cast<int>(std::to_string(total).size());
  SyntheticCorpus out;
  out.corpus.provenance = Provenance::synthetic;
  out.corpus.letters.reserve(total);
  for (std::size_t n = 0; n < total; ++n) {
    const Gender g = labels[n];
    const std::size_t length = rng.between(spec.min_length, spec.max_length);
    std::vector<std::string> tokens(length);
    for (auto& t : tokens) t = spec.base_vocab[rng.below(spec.base_vocab.size())];

    // Cue tokens overwrite filler at distinct positions so letter length
    // stays independent of the label.
    std::vector<std::size_t> positions(length);
    for (std::size_t i = 0; i < length; ++i) positions[i] = i;
    rng.shuffle(std::span<std::size_t>(positions));
    std::size_t next_pos = 0;
    for (const auto& e : spec.explicit_terms) {
      const bool include = e.gender == g && rng.bernoulli(e.probability);
      if (!include) continue;
      for (std::size_t k = 0; k < e.occurrences; ++k) tokens[positions[next_pos++]] = ascii_lower(e.surface);
    }
    for (const auto& c : spec.implicit_cues) {
      const double p = c.gender == g ? c.probability : c.other_probability;
      if (rng.bernoulli(p)) tokens[positions[next_pos++]] = ascii_lower(c.token);
    }

    std::string text;
    std::size_t sentence_left = 0;
    for (std::size_t i = 0; i < length; ++i) {
      const bool sentence_start = sentence_left == 0;
      if (sentence_start) sentence_left = rng.between(6, 18);
      if (!text.empty()) text += ' ';
      text += sentence_start ? apply_casing(tokens[i], Casing::title) : tokens[i];
      if (--sentence_left == 0 || i + 1 == length) {
        text += '.';
        sentence_left = 0;
      }
    }

    char id[32];
    std::snprintf(id, sizeof(id), "syn-%0*zu", width, n + 1);
    Letter letter;
    letter.id = id;
    letter.text = std::move(text);
    letter.gender = g;
    out.corpus.letters.push_back(std::move(letter));
  }
  out.bayes_accuracy = bayes_accuracy(spec);
  return out;
}

CueSpec parse_cue_spec(std::string_view json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed cue spec: ") + e.what());
  }
  CueSpec spec;
  try {
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("letters_per_class")) {
      spec.female_letters = spec.male_letters = j["letters_per_class"].get<std::size_t>();
    }
    spec.female_letters = j.value("female_letters", spec.female_letters);
    spec.male_letters = j.value("male_letters", spec.male_letters);
    spec.min_length = j.value("min_length", spec.min_length);
    spec.max_length = j.value("max_length", spec.max_length);
    if (j.contains("base_vocab")) spec.base_vocab = j["base_vocab"].get<std::vector<std::string>>();
    for (const auto& e : j.value("explicit_terms", json::array())) {
      ExplicitCue cue;
      cue.surface = e.at("surface").get<std::string>();
      cue.gender = parse_gender(e.at("gender").get<std::string>());
      cue.probability = e.value("probability", 1.0);
      cue.occurrences = e.value("occurrences", std::size_t{2});
      spec.explicit_terms.push_back(std::move(cue));
    }
    for (const auto& c : j.value("implicit_cues", json::array())) {
      ImplicitCue cue;
      cue.token = c.at("token").get<std::string>();
      cue.gender = parse_gender(c.at("gender").get<std::string>());
      cue.probability = c.at("probability").get<double>();
      cue.other_probability = c.value("other_probability", 0.0);
      spec.implicit_cues.push_back(std::move(cue));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid cue spec: ") + e.what());
  }
  return spec;
}

CueSpec load_cue_spec(const std::filesystem::path& path) { return parse_cue_spec(read_file(path)); }

}  // namespace leakaudit
