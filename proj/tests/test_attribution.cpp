#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "leakaudit/attribution.hpp"
#include "leakaudit/error.hpp"
#include "leakaudit/model.hpp"
#include "leakaudit/random.hpp"
#include "leakaudit/synthetic.hpp"

using namespace leakaudit;

namespace {

Letter letter(std::string id, std::string text, Gender g = Gender::male) {
  Letter l;
  l.id = std::move(id);
  l.text = std::move(text);
  l.gender = g;
  return l;
}

// Average marginal contribution over every ordering of the players.
std::vector<double> permutation_oracle(const ValueFunction& f) {
  const std::size_t n = f.players();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(n, 0.0);
  double count = 0;
  do {
    Coalition c(n, 0);
    double prev = f.value(c);
    for (std::size_t p : order) {
      c[p] = 1;
      const double v = f.value(c);
      phi[p] += v - prev;
      prev = v;
    }
    count += 1;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& x : phi) x /= count;
  return phi;
}

// Random game: a sum of pairwise and triple interaction terms.
LambdaValueFunction random_game(Rng& rng, std::size_t n) {
  std::vector<double> single(n), pair(n * n);
  for (auto& x : single) x = rng.uniform() * 2 - 1;
  for (auto& x : pair) x = rng.uniform() - 0.5;
  const double triple = rng.uniform();
  return LambdaValueFunction(n, [=](const Coalition& c) {
    double v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!c[i]) continue;
      v += single[i];
      for (std::size_t j = i + 1; j < n; ++j) v += c[j] ? pair[i * n + j] : 0.0;
    }
    if (n >= 3 && c[0] && c[1] && c[2]) v += triple;
    return v;
  });
}

double total(const Coalition& c) { return static_cast<double>(std::count(c.begin(), c.end(), 1)); }

Corpus cue_corpus(std::size_t per_class, std::uint64_t seed) {
  CueSpec spec;
  spec.female_letters = per_class;
  spec.male_letters = per_class;
  spec.min_length = 30;
  spec.max_length = 60;
  spec.seed = seed;
  spec.implicit_cues = {{"leadership", Gender::male, 0.8, 0.2}};
  return generate_synthetic(spec).corpus;
}

}  // namespace

TEST_CASE("additive games give back their coefficients") {
  const std::vector<double> coef{0.5, -1.25, 3.0, 0.0};
  LambdaValueFunction f(coef.size(), [&](const Coalition& c) {
    double v = 7.0;
    for (std::size_t i = 0; i < c.size(); ++i) v += c[i] ? coef[i] : 0.0;
    return v;
  });
  const ShapResult exact = shapley_exact(f);
  CHECK(exact.base_value == 7.0);
  for (std::size_t i = 0; i < coef.size(); ++i) CHECK(exact.phi[i] == doctest::Approx(coef[i]).epsilon(1e-12));
  // Every permutation sees the same marginal gains: zero variance.
  const ShapResult sampled = shapley_sampled(f, 50, 1);
  for (std::size_t i = 0; i < coef.size(); ++i) {
    CHECK(sampled.phi[i] == doctest::Approx(coef[i]).epsilon(1e-12));
    CHECK(sampled.std_error[i] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("three-player hand computation") {
  // v(S) = |S|^2: each player gets v(N)/3 by symmetry.
  LambdaValueFunction sq(3, [](const Coalition& c) { return total(c) * total(c); });
  for (double p : shapley_exact(sq).phi) CHECK(std::abs(p - 3.0) <= 1e-12);

  // v = x0 * x1 + x2: the product is split evenly, x2 keeps its unit.
  LambdaValueFunction g(3, [](const Coalition& c) { return (c[0] && c[1] ? 1.0 : 0.0) + (c[2] ? 1.0 : 0.0); });
  const ShapResult r = shapley_exact(g);
  CHECK(std::abs(r.phi[0] - 0.5) <= 1e-12);
  CHECK(std::abs(r.phi[1] - 0.5) <= 1e-12);
  CHECK(std::abs(r.phi[2] - 1.0) <= 1e-12);
}

TEST_CASE("dummy and symmetric players") {
  LambdaValueFunction f(4, [](const Coalition& c) { return c[0] && c[1] ? 2.0 : (c[0] || c[1] ? 0.5 : 0.0); });
  const ShapResult r = shapley_exact(f);
  CHECK(std::abs(r.phi[0] - r.phi[1]) <= 1e-12);
  CHECK(std::abs(r.phi[2]) <= 1e-12);
  CHECK(std::abs(r.phi[3]) <= 1e-12);
}

TEST_CASE("property: exact values match the permutation oracle and are efficient") {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = rng.between(1, 7);
    const LambdaValueFunction f = random_game(rng, n);
    const ShapResult r = shapley_exact(f);
    const auto oracle = permutation_oracle(f);
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(r.phi[i] - oracle[i]) <= 1e-12);
      sum += r.phi[i];
    }
    CHECK(std::abs(sum - (r.full_value - r.base_value)) <= 1e-9);
  }
}

TEST_CASE("exact enumeration limits") {
  LambdaValueFunction none(0, [](const Coalition&) { return 0.0; });
  CHECK_THROWS_AS(shapley_exact(none), UsageError);
  LambdaValueFunction big(21, [](const Coalition&) { return 0.0; });
  CHECK_THROWS_AS(shapley_exact(big), UsageError);
  CHECK_THROWS_AS(shapley_exact(LambdaValueFunction(5, total), 4), UsageError);
}

TEST_CASE("property: sampled values approach exact ones") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const LambdaValueFunction f = random_game(rng, 10);
    const ShapResult exact = shapley_exact(f);
    const ShapResult sampled = shapley_sampled(f, 4000, 100 + trial);
    double sum = 0;
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(std::abs(sampled.phi[i] - exact.phi[i]) <= 0.02 + 4 * sampled.std_error[i]);
      sum += sampled.phi[i];
    }
    // Every permutation telescopes to f(N) - f(empty), so the mean does too.
    CHECK(std::abs(sum - (exact.full_value - exact.base_value)) <= 1e-9);
  }
}

TEST_CASE("sampling is deterministic per seed and shrinks with more samples") {
  Rng rng(31);
  const LambdaValueFunction f = random_game(rng, 8);
  const ShapResult a = shapley_sampled(f, 300, 9);
  const ShapResult b = shapley_sampled(f, 300, 9);
  CHECK(a.phi == b.phi);
  CHECK(a.std_error == b.std_error);
  const ShapResult exact = shapley_exact(f);
  const ShapResult small = shapley_sampled(f, 2000, 4);
  const ShapResult large = shapley_sampled(f, 8000, 4);
  double err_small = 0, err_large = 0, se_small = 0, se_large = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    err_small += std::abs(small.phi[i] - exact.phi[i]);
    err_large += std::abs(large.phi[i] - exact.phi[i]);
    se_small += small.std_error[i];
    se_large += large.std_error[i];
  }
  CHECK(se_large < se_small);
  CHECK(err_large <= err_small + 0.01);
  CHECK_THROWS_AS(shapley_sampled(f, 0, 1), UsageError);
}

TEST_CASE("masked value function has the closed form") {
  const ClassifierModel m =
      make_logistic_model({{"alpha", 1.0}, {"beta", -0.5}, {"gamma", 0.25}, {"[MASK]", 0.1}}, 0.2);
  const Letter l = letter("L", "alpha beta beta gamma unseen [MASK]");
  const MaskedValueFunction f(m, l);
  REQUIRE(f.players() == 3);
  CHECK(f.tokens() == std::vector<std::string>{"alpha", "beta", "gamma"});
  CHECK(f.counts() == std::vector<std::uint32_t>{1, 2, 1});
  const double w[3] = {1.0, -0.5, 0.25};
  const double c[3] = {1, 2, 1};
  for (int mask = 0; mask < 8; ++mask) {
    Coalition s(3, 0);
    double z = 0.2 + 0.1;  // the mask symbol already in the text
    for (int i = 0; i < 3; ++i) {
      s[i] = (mask >> i) & 1;
      z += s[i] ? w[i] * c[i] : 0.1 * c[i];
    }
    CHECK(std::abs(f.value(s) - sigmoid(z)) <= 1e-15);
  }
  CHECK(std::abs(f.full_value() - m.proba_of_text(l.text)) <= 1e-12);

  // walk() agrees with value() along any order.
  const std::vector<std::size_t> order{2, 0, 1};
  std::vector<double> out(3);
  f.walk(order, out);
  Coalition s(3, 0);
  for (std::size_t k = 0; k < 3; ++k) {
    s[order[k]] = 1;
    CHECK(std::abs(out[k] - f.value(s)) <= 1e-15);
  }

  // Exact attributions match the permutation oracle on the model game.
  const ShapResult r = shapley_exact(f);
  const auto oracle = permutation_oracle(f);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(r.phi[i] - oracle[i]) <= 1e-12);
  CHECK(r.phi[0] > 0);
  CHECK(r.phi[1] < 0);
}

TEST_CASE("explain_letter switches to sampling above the cap") {
  std::vector<std::pair<std::string, double>> weights;
  std::string text;
  for (int i = 0; i < 12; ++i) {
    const std::string t = "tok" + std::to_string(i);
    weights.emplace_back(t, (i % 3) - 1.0);
    text += t + " ";
  }
  const ClassifierModel m = make_logistic_model(weights, 0.0);
  RankOptions opt;
  opt.exact_cap = 12;
  const ShapResult e = explain_letter(m, letter("a", text), opt);
  CHECK(e.method == ShapMethod::exact);
  CHECK(e.letter_id == "a");
  opt.exact_cap = 5;
  opt.n_samples = 3000;
  const ShapResult s = explain_letter(m, letter("a", text), opt);
  CHECK(s.method == ShapMethod::permutation);
  for (std::size_t i = 0; i < e.phi.size(); ++i) CHECK(std::abs(s.phi[i] - e.phi[i]) <= 0.02);
  CHECK(explain_letter(m, letter("a", text), opt).phi == s.phi);
}

TEST_CASE("rank_tokens recovers a planted cue") {
  const Corpus c = cue_corpus(300, 5);
  TrainConfig cfg;
  cfg.seed = 2;
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::build(c, Tokenizer{}, 2));
  const ClassifierModel m = train(c, Corpus{}, cfg, vocab);
  RankOptions opt;
  opt.sample_size = 200;
  opt.seed = 4;
  const RankResult r = rank_tokens(c, m, PosLexicon(std::map<std::string, std::string>{{"leadership", "noun"}}), opt, &c);
  CHECK(r.letters_attributed > 0);
  CHECK(r.background_value.has_value());
  const auto male = r.male.tokens();
  CHECK(male.count("leadership") == 1);
  CHECK(r.female.tokens().count("leadership") == 0);
  REQUIRE_FALSE(r.male.groups.empty());
  CHECK(r.male.groups.front().pos == "noun");
  CHECK(r.male.groups.front().rows.front().token == "leadership");
  for (const auto& g : r.male.groups) {
    CHECK(g.rows.size() <= opt.top_k);
    for (const auto& row : g.rows) {
      CHECK(row.mean_shap > 0);
      CHECK(row.support >= opt.min_support);
    }
  }
  for (const auto& g : r.female.groups) {
    for (const auto& row : g.rows) CHECK(row.mean_shap < 0);
  }
}

TEST_CASE("rank_tokens support filter and order invariance") {
  Corpus c;
  for (int i = 0; i < 30; ++i) {
    c.letters.push_back(letter("m" + std::to_string(i), "strong strong team", Gender::male));
    c.letters.push_back(letter("f" + std::to_string(i), "warm team", Gender::female));
  }
  c.letters.push_back(letter("rare", "rareword strong", Gender::male));
  const ClassifierModel m = make_logistic_model({{"strong", 1.0}, {"warm", -1.0}, {"rareword", 5.0}}, 0.0);
  RankOptions opt;
  opt.min_support = 20;
  const RankResult a = rank_tokens(c, m, PosLexicon{}, opt);
  CHECK(a.male.tokens() == std::set<std::string>{"strong"});
  CHECK(a.female.tokens() == std::set<std::string>{"warm"});
  const auto rare = std::find_if(a.all_rows.begin(), a.all_rows.end(), [](const auto& r) { return r.token == "rareword"; });
  REQUIRE(rare != a.all_rows.end());
  CHECK(rare->support == 1);

  Corpus reversed = c;
  std::reverse(reversed.letters.begin(), reversed.letters.end());
  opt.sample_size = 25;
  const RankResult x = rank_tokens(c, m, PosLexicon{}, opt);
  const RankResult y = rank_tokens(reversed, m, PosLexicon{}, opt);
  REQUIRE(x.all_rows.size() == y.all_rows.size());
  for (std::size_t i = 0; i < x.all_rows.size(); ++i) {
    CHECK(x.all_rows[i].token == y.all_rows[i].token);
    CHECK(x.all_rows[i].mean_shap == y.all_rows[i].mean_shap);
  }
  CHECK_THROWS_AS(rank_tokens(Corpus{}, m, PosLexicon{}, opt), DataError);
}

TEST_CASE("sample_letters is seeded and order independent") {
  Corpus c;
  for (int i = 0; i < 50; ++i) c.letters.push_back(letter("id" + std::to_string(i), "x"));
  Corpus r = c;
  std::reverse(r.letters.begin(), r.letters.end());
  const Corpus a = sample_letters(c, 10, 3);
  const Corpus b = sample_letters(r, 10, 3);
  REQUIRE(a.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(a.letters[i].id == b.letters[i].id);
  CHECK(sample_letters(c, 500, 3).size() == 50);
}
