#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leakaudit/corpus.hpp"

namespace leakaudit {

struct ExplicitCue {
  std::string surface;
  Gender gender = Gender::male;
  double probability = 1.0;  // inclusion probability in letters of `gender`
  std::size_t occurrences = 2;
};

struct ImplicitCue {
  std::string token;
  Gender gender = Gender::male;  // class the cue leans towards
  double probability = 0.5;        // inclusion probability in that class
  double other_probability = 0.0;  // inclusion probability in the other class
};

struct CueSpec {
  std::vector<ExplicitCue> explicit_terms;
  std::vector<ImplicitCue> implicit_cues;
  std::vector<std::string> base_vocab;
  std::size_t female_letters = 500;
  std::size_t male_letters = 500;
  std::size_t min_length = 150;
  std::size_t max_length = 400;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticCorpus {
  Corpus corpus;
  double bayes_accuracy = 0.5;
};

// Closed-form accuracy of the likelihood-ratio rule over cue presence
// indicators, weighted by the class priors implied by the letter counts.
double bayes_accuracy(const CueSpec& spec);

SyntheticCorpus generate_synthetic(const CueSpec& spec);

CueSpec parse_cue_spec(std::string_view json_text);
CueSpec load_cue_spec(const std::filesystem::path& path);

}  // namespace leakaudit
