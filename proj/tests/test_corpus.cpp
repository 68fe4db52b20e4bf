#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "leakaudit/corpus.hpp"
#include "leakaudit/error.hpp"
#include "leakaudit/features.hpp"
#include "leakaudit/random.hpp"
#include "leakaudit/synthetic.hpp"

using namespace leakaudit;

namespace {

Corpus make_corpus(std::size_t female, std::size_t male) {
  Corpus c;
  for (std::size_t i = 0; i < female + male; ++i) {
    Letter l;
    l.id = "L" + std::to_string(i);
    l.text = "text " + std::to_string(i);
    l.gender = i < female ? Gender::female : Gender::male;
    c.letters.push_back(l);
  }
  return c;
}

Corpus parse(const std::string& s) {
  std::istringstream in(s);
  return parse_corpus(in);
}

// Accuracy of the optimal rule, enumerated independently of the library:
// sum over presence patterns of max(prior_f * P(x|f), prior_m * P(x|m)).
double bayes_oracle(double prior_m, const std::vector<std::pair<double, double>>& cues /* (p_f, p_m) */) {
  double acc = 0.0;
  const std::size_t k = cues.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    double f = 1.0 - prior_m;
    double m = prior_m;
    for (std::size_t j = 0; j < k; ++j) {
      const bool on = (mask >> j) & 1U;
      f *= on ? cues[j].first : 1.0 - cues[j].first;
      m *= on ? cues[j].second : 1.0 - cues[j].second;
    }
    acc += std::max(f, m);
  }
  return acc;
}

}  // namespace

TEST_CASE("JSON lines round trip") {
  const std::string src =
      "{\"id\":\"a\",\"text\":\"He is kind.\",\"gender\":1,\"split\":\"train\",\"meta\":{\"field\":\"surgery\"}}\n"
      "\n"
      "{\"id\":\"b\",\"text\":\"She is kind.\",\"gender\":0}\n";
  const Corpus c = parse(src);
  REQUIRE(c.size() == 2);
  CHECK(c.letters[0].gender == Gender::male);
  CHECK(c.letters[0].split == Split::train);
  CHECK(c.letters[0].meta.at("field") == "surgery");
  CHECK_FALSE(c.letters[1].split.has_value());
  CHECK_FALSE(c.has_splits());
  const Corpus again = parse(serialize_corpus(c));
  CHECK(again.letters == c.letters);
  CHECK(serialize_corpus(again) == serialize_corpus(c));
}

TEST_CASE("corpus parse errors name the line") {
  auto line_of = [](const std::string& s) -> std::size_t {
    try {
      parse(s);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string good = "{\"id\":\"a\",\"text\":\"x\",\"gender\":0}\n";
  CHECK(line_of(good + "{not json}\n") == 2);
  CHECK(line_of(good + "{\"id\":\"b\",\"text\":\"x\",\"gender\":2}\n") == 2);
  CHECK(line_of(good + good) == 2);  // duplicate id
  CHECK(line_of("{\"id\":\"a\",\"gender\":0}\n") == 1);
  CHECK(line_of(good + "{\"id\":\"b\",\"text\":\"\",\"gender\":1}\n") == 2);
  CHECK(line_of(good + "{\"id\":\"b\",\"text\":\"x\",\"gender\":1,\"split\":\"dev\"}\n") == 2);
}

TEST_CASE("stratified split of 31 female / 69 male letters") {
  const Corpus c = make_corpus(31, 69);
  const Corpus s = stratified_split(c, {}, 7);
  REQUIRE(s.has_splits());
  const auto test = s.subset(Split::test).class_counts();
  CHECK((test.female == 3 || test.female == 4));
  // Largest remainder per class: 31 -> 25/3/3, 69 -> 55/7/7.
  CHECK(s.subset(Split::train).class_counts() == ClassCounts{25, 55});
  CHECK(s.subset(Split::val).class_counts() == ClassCounts{3, 7});
  CHECK(test == ClassCounts{3, 7});
  CHECK(s.size() == c.size());
  std::set<std::string> ids;
  for (const auto& l : s.letters) ids.insert(l.id);
  CHECK(ids.size() == c.size());

  const Corpus again = stratified_split(c, {}, 7);
  CHECK(again.letters == s.letters);
  const Corpus other = stratified_split(c, {}, 8);
  CHECK_FALSE(other.letters == s.letters);
}

TEST_CASE("split rejects bad ratios and tiny classes") {
  CHECK_THROWS_AS(stratified_split(make_corpus(10, 10), {0.5, 0.5, 0.5}, 1), UsageError);
  CHECK_THROWS_AS(stratified_split(make_corpus(2, 10), {}, 1), DataError);
}

TEST_CASE("property: split partitions every class for random sizes") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t f = rng.between(3, 60);
    const std::size_t m = rng.between(3, 60);
    const double train = 0.5 + 0.4 * rng.uniform();
    const double val = (1.0 - train) * rng.uniform();
    const SplitRatios r{train, val, 1.0 - train - val};
    const Corpus s = stratified_split(make_corpus(f, m), r, rng.next());
    std::size_t total_f = 0;
    for (Split sp : {Split::train, Split::val, Split::test}) {
      const auto counts = s.subset(sp).class_counts();
      total_f += counts.female;
      const double ratio = sp == Split::train ? r.train : sp == Split::val ? r.val : r.test;
      CHECK(std::abs(static_cast<double>(counts.female) - ratio * static_cast<double>(f)) < 1.0 + 1e-9);
      CHECK(std::abs(static_cast<double>(counts.male) - ratio * static_cast<double>(m)) < 1.0 + 1e-9);
    }
    CHECK(total_f == f);
    CHECK(s.class_counts() == ClassCounts{f, m});
  }
}

TEST_CASE("majority subsampling balances classes and keeps order") {
  const Corpus c = make_corpus(4, 10);
  const Corpus s = subsample_majority(c, 5);
  CHECK(s.class_counts() == ClassCounts{4, 4});
  for (std::size_t i = 0; i < 4; ++i) CHECK(s.letters[i].id == c.letters[i].id);
  for (std::size_t i = 1; i < s.size(); ++i) {
    CHECK(std::stoi(s.letters[i - 1].id.substr(1)) < std::stoi(s.letters[i].id.substr(1)));
  }
  CHECK(subsample_majority(c, 5).letters == s.letters);
  CHECK(subsample_majority(make_corpus(3, 3), 1).size() == 6);
  CHECK_THROWS_AS(subsample_majority(make_corpus(0, 3), 1), DataError);
}

TEST_CASE("Bayes accuracy matches an independent enumeration") {
  CueSpec one;
  one.implicit_cues = {{"leadership", Gender::male, 0.8, 0.2}};
  CHECK(bayes_accuracy(one) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(bayes_accuracy(one) == doctest::Approx(bayes_oracle(0.5, {{0.2, 0.8}})).epsilon(1e-12));

  CueSpec two;
  two.female_letters = 300;
  two.male_letters = 700;
  two.implicit_cues = {{"a", Gender::male, 0.7, 0.3}, {"b", Gender::female, 0.6, 0.2}};
  CHECK(bayes_accuracy(two) == doctest::Approx(bayes_oracle(0.7, {{0.3, 0.7}, {0.6, 0.2}})).epsilon(1e-12));

  CueSpec expl;
  expl.explicit_terms = {{"he", Gender::male, 1.0, 2}, {"she", Gender::female, 1.0, 2}};
  CHECK(bayes_accuracy(expl) == doctest::Approx(1.0));

  CueSpec none;
  CHECK(bayes_accuracy(none) == doctest::Approx(0.5));
}

TEST_CASE("synthetic corpus has the requested shape and cue rates") {
  CueSpec spec;
  spec.female_letters = 600;
  spec.male_letters = 400;
  spec.min_length = 50;
  spec.max_length = 80;
  spec.seed = 9;
  spec.implicit_cues = {{"leadership", Gender::male, 0.8, 0.2}};
  spec.explicit_terms = {{"he", Gender::male, 1.0, 2}};
  const SyntheticCorpus s = generate_synthetic(spec);
  CHECK(s.corpus.class_counts() == ClassCounts{600, 400});
  CHECK(s.corpus.provenance == Provenance::synthetic);
  validate_corpus(s.corpus);

  const Tokenizer tok;
  std::map<Gender, std::size_t> with_cue, with_he;
  for (const auto& l : s.corpus.letters) {
    const auto tokens = tok.tokenize(l.text);
    CHECK(tokens.size() >= 50);
    CHECK(tokens.size() <= 80);
    with_cue[l.gender] += std::count(tokens.begin(), tokens.end(), "leadership") > 0;
    const auto he = std::count(tokens.begin(), tokens.end(), "he");
    with_he[l.gender] += he > 0;
    if (l.gender == Gender::male) CHECK(he == 2);
  }
  CHECK(with_he[Gender::female] == 0);
  // 4-sigma binomial bands.
  CHECK(std::abs(with_cue[Gender::male] / 400.0 - 0.8) < 4 * std::sqrt(0.16 / 400));
  CHECK(std::abs(with_cue[Gender::female] / 600.0 - 0.2) < 4 * std::sqrt(0.16 / 600));

  const SyntheticCorpus again = generate_synthetic(spec);
  CHECK(again.corpus.letters == s.corpus.letters);
}

TEST_CASE("cue spec JSON") {
  const CueSpec spec = parse_cue_spec(R"({"seed": 4, "letters_per_class": 10, "min_length": 20, "max_length": 30,
    "implicit_cues": [{"token": "leadership", "gender": "male", "probability": 0.8, "other_probability": 0.2}],
    "explicit_terms": [{"surface": "she", "gender": "female"}]})");
  CHECK(spec.female_letters == 10);
  CHECK(spec.male_letters == 10);
  CHECK(spec.implicit_cues.at(0).other_probability == doctest::Approx(0.2));
  CHECK(spec.explicit_terms.at(0).gender == Gender::female);
  CHECK_THROWS_AS(parse_cue_spec("{\"seed\": "), DataError);
  const CueSpec bad = parse_cue_spec(R"({"implicit_cues": [{"token": "x", "gender": "male", "probability": 1.5}]})");
  CHECK_THROWS_AS(generate_synthetic(bad), UsageError);
}
