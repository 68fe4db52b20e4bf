#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "leakaudit/error.hpp"
#include "leakaudit/flip.hpp"
#include "leakaudit/random.hpp"

using namespace leakaudit;

namespace {

Letter letter(std::string id, std::string text, Gender g) {
  Letter l;
  l.id = std::move(id);
  l.text = std::move(text);
  l.gender = g;
  return l;
}

using Weights = std::map<std::string, double>;

// Logit of a space-separated text under a hand-held weight table.
double logit(const Weights& w, double bias, const std::string& text) {
  std::istringstream in(text);
  std::string t;
  double z = bias;
  while (in >> t) {
    const auto it = w.find(t);
    if (it != w.end()) z += it->second;
  }
  return z;
}

std::string drop(const std::string& text, const std::string& token) {
  std::istringstream in(text);
  std::string t, out;
  while (in >> t) out += (t == token ? std::string("[MASK]") : t) + " ";
  return out;
}

ClassifierModel model_of(const Weights& w, double bias) {
  return make_logistic_model(std::vector<std::pair<std::string, double>>(w.begin(), w.end()), bias);
}

}  // namespace

TEST_CASE("a near-threshold cue flips male to female when masked") {
  const ClassifierModel m = model_of({{"leadership", 3.0}, {"kind", -1.0}}, -2.5);
  const Letter l = letter("a", "kind words about leadership", Gender::male);
  // z goes from -0.5 + ... : -2.5 - 1 + 3 = -0.5 -> female. Add a second cue.
  const Letter l2 = letter("b", "leadership and more leadership but kind", Gender::male);
  CHECK(flip_direction(l, m, "leadership") == 0);
  CHECK(flip_direction(l2, m, "leadership") == -1);
  CHECK(flip_direction(l2, m, "kind") == 0);
  CHECK(flip_direction(l2, m, "absent") == 0);
  Corpus c;
  c.letters = {l, l2};
  CHECK(count_flips(c, m, "leadership") == FlipCounts{0, 1});
  CHECK_THROWS_AS(count_flips(c, m, ""), UsageError);
}

TEST_CASE("masking a negative-weight token pushes towards male") {
  const ClassifierModel m = model_of({{"warm", -2.0}}, 1.0);
  const Letter l = letter("a", "a warm note", Gender::female);
  CHECK(flip_direction(l, m, "warm") == 1);
}

TEST_CASE("select_subset keeps letters the masked model newly gets wrong") {
  const ClassifierModel edg = model_of({{"strong", 2.0}, {"warm", -2.0}}, 0.0);
  const ClassifierModel masked = model_of({{"[MASK]", -1.0}}, 0.5);
  Corpus c;
  c.letters = {
      letter("m1", "strong", Gender::male),         // edg right, masked: 0.5-1 -> female: kept
      letter("m2", "strong other", Gender::male),   // same: kept
      letter("m3", "plain", Gender::male),          // edg 0 -> male right; no mask -> male: dropped
      letter("f1", "warm", Gender::female),         // edg right; masked -> female: dropped
      letter("f2", "strong", Gender::female),       // edg wrong: dropped
      letter("f3", "plain", Gender::female),        // edg wrong (tie -> male): dropped
  };
  const MaskPlan plan = MaskPlan::make({"strong", "warm"});
  const Corpus s = select_subset(c, edg, masked, plan);
  REQUIRE(s.size() == 2);
  CHECK(s.letters[0].id == "m1");
  CHECK(s.letters[1].id == "m2");

  // A model that already fails everywhere selects nothing.
  const ClassifierModel always_male = model_of({}, 5.0);
  Corpus fem;
  fem.letters = {letter("f", "warm", Gender::female)};
  CHECK(select_subset(fem, always_male, masked, plan).empty());
}

TEST_CASE("property: flip table matches a brute-force recount") {
  Rng rng(41);
  const std::vector<std::string> vocab{"alpha", "beta", "gamma", "delta", "eps"};
  for (int trial = 0; trial < 15; ++trial) {
    Weights w;
    for (const auto& t : vocab) w[t] = rng.uniform() * 4 - 2;
    const double bias = rng.uniform() - 0.5;
    const ClassifierModel m = model_of(w, bias);
    Corpus subset;
    const std::size_t n = rng.between(2, 20);
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      const auto len = rng.between(1, 8);
      for (std::uint64_t k = 0; k < len; ++k) text += vocab[rng.below(vocab.size())] + " ";
      subset.letters.push_back(letter("L" + std::to_string(i), text, rng.bernoulli(0.3) ? Gender::male : Gender::female));
    }
    FlipConfig cfg;
    cfg.candidate_tokens = {"gamma", "alpha", "beta", "alpha"};
    cfg.runs = 7;
    cfg.seed = 1000 + trial;
    const FlipTable table = flip_table_for_subset(subset, m, cfg);
    CHECK(table.rows.size() == 3);

    const bool balanced = subset.class_counts().female > 0 && subset.class_counts().male > 0;
    for (const auto& row : table.rows) {
      double f_to_m = 0, m_to_f = 0;
      for (std::size_t run = 0; run < cfg.runs; ++run) {
        const Corpus sample = balanced ? subsample_majority(subset, cfg.seed + run) : subset;
        for (const auto& l : sample.letters) {
          const bool before = logit(w, bias, l.text) >= 0;
          const bool after = logit(w, bias, drop(l.text, row.token)) >= 0;
          if (!before && after) f_to_m += 1;
          if (before && !after) m_to_f += 1;
        }
      }
      CHECK(row.f_to_m == doctest::Approx(f_to_m / cfg.runs).epsilon(1e-12));
      CHECK(row.m_to_f == doctest::Approx(m_to_f / cfg.runs).epsilon(1e-12));
      CHECK(row.abs_diff == doctest::Approx(std::abs(row.f_to_m - row.m_to_f)));
      // Each run contributes at most one flip per letter.
      CHECK(row.f_to_m + row.m_to_f <= static_cast<double>(subset.size()) + 1e-12);
      // A positive-weight token can only lower the logit when masked.
      if (w[row.token] > 0) CHECK(row.f_to_m == 0.0);
      if (w[row.token] < 0) CHECK(row.m_to_f == 0.0);
    }
    for (std::size_t i = 1; i < table.rows.size(); ++i) CHECK(table.rows[i - 1].abs_diff >= table.rows[i].abs_diff);

    const FlipTable again = flip_table_for_subset(subset, m, cfg);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      CHECK(again.rows[i].token == table.rows[i].token);
      CHECK(again.rows[i].f_to_m == table.rows[i].f_to_m);
      CHECK(again.rows[i].m_to_f == table.rows[i].m_to_f);
    }
  }
}

TEST_CASE("degenerate subsets produce warnings, not errors") {
  const ClassifierModel m = model_of({{"x", 1.0}}, -0.5);
  FlipConfig cfg;
  cfg.candidate_tokens = {"x"};
  cfg.runs = 3;
  const FlipTable empty = flip_table_for_subset(Corpus{}, m, cfg);
  CHECK(empty.rows.size() == 1);
  CHECK(empty.rows[0].abs_diff == 0.0);
  CHECK(empty.warnings.size() == 1);

  Corpus males;
  males.letters = {letter("a", "x", Gender::male), letter("b", "x y", Gender::male)};
  const FlipTable single = flip_table_for_subset(males, m, cfg);
  CHECK(single.warnings.size() == 1);
  CHECK(single.rows[0].m_to_f == 2.0);

  FlipConfig bad = cfg;
  bad.runs = 0;
  CHECK_THROWS_AS(flip_table_for_subset(males, m, bad), UsageError);
  bad = cfg;
  bad.candidate_tokens.clear();
  CHECK_THROWS_AS(flip_table_for_subset(males, m, bad), UsageError);
}

TEST_CASE("flip_analysis subset rules") {
  const ClassifierModel edg = model_of({{"strong", 2.0}}, -1.0);
  const ClassifierModel masked = model_of({}, -1.0);
  Corpus c;
  c.letters = {letter("m", "strong", Gender::male), letter("f", "quiet", Gender::female),
               letter("f2", "strong", Gender::female)};
  const MaskPlan plan = MaskPlan::make({"strong"});
  FlipConfig cfg;
  cfg.candidate_tokens = {"strong"};
  cfg.runs = 4;
  const FlipTable selected = flip_analysis(c, edg, masked, plan, cfg);
  CHECK(selected.subset_counts.total() == 1);
  CHECK(selected.rows[0].m_to_f == 1.0);
  cfg.subset_rule = SubsetRule::all_letters;
  const FlipTable all = flip_analysis(c, edg, masked, plan, cfg);
  CHECK(all.subset_counts.total() == 3);
  CHECK(parse_subset_rule("all") == SubsetRule::all_letters);
  CHECK(parse_subset_rule("paper_rule") == SubsetRule::paper_rule);
  CHECK_THROWS_AS(parse_subset_rule("bogus"), UsageError);
}
