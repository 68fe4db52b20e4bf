#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <set>
#include <string>
#include <vector>

#include "leakaudit/corpus.hpp"
#include "leakaudit/features.hpp"
#include "leakaudit/model.hpp"

namespace leakaudit {

// Membership flags over the players of a value function.
using Coalition = std::vector<char>;

class ValueFunction {
 public:
  virtual ~ValueFunction() = default;
  virtual std::size_t players() const = 0;
  virtual double value(const Coalition& members) const = 0;

  // Values after inserting players in `order` one at a time, starting from
  // the empty coalition: out[k] = f({order[0..k]}). The default re-evaluates
  // value() at every step; subclasses with cheap updates override it.
  virtual void walk(std::span<const std::size_t> order, std::span<double> out) const;
};

class LambdaValueFunction final : public ValueFunction {
 public:
  LambdaValueFunction(std::size_t n, std::function<double(const Coalition&)> f) : n_(n), f_(std::move(f)) {}
  std::size_t players() const override { return n_; }
  double value(const Coalition& members) const override { return f_(members); }

 private:
  std::size_t n_;
  std::function<double(const Coalition&)> f_;
};

// f(S) = sigmoid(bias + sum_{i in S} w_i c_i + sum_{i not in S} w_mask c_i):
// a letter scored by a logit-linear model with every non-member token
// replaced by the mask symbol. Players are the letter's distinct in-vocabulary
// tokens other than the mask symbol, in vocabulary order.
class MaskedValueFunction final : public ValueFunction {
 public:
  MaskedValueFunction(const ClassifierModel& model, const Letter& letter, const std::string& mask_symbol = "[MASK]");

  std::size_t players() const override { return tokens_.size(); }
  double value(const Coalition& members) const override;
  void walk(std::span<const std::size_t> order, std::span<double> out) const override;

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }
  double full_value() const;

  // Mean predict_proba over a background sample; stored alongside results.
  std::optional<double> background_value;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint32_t> counts_;
  std::vector<double> present_;  // w_i * c_i
  std::vector<double> masked_;   // w_mask * c_i
  double base_logit_ = 0.0;      // bias + out-of-game token contributions
};

MaskedValueFunction masked_value_function(const ClassifierModel& model, const Letter& letter,
                                          const Corpus& background, const std::string& mask_symbol = "[MASK]");

double background_mean(const ClassifierModel& model, const Corpus& background);

// Draws up to `size` letters with a fixed seed, independent of letter order.
Corpus sample_letters(const Corpus& corpus, std::size_t size, std::uint64_t seed);

enum class ShapMethod { exact, permutation };

struct ShapResult {
  std::string letter_id;
  ShapMethod method = ShapMethod::exact;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double base_value = 0.0;  // f(empty coalition)
  std::optional<double> background_value;
  double full_value = 0.0;  // f(all players)
  std::vector<std::string> tokens;
  std::vector<double> phi;
  std::vector<double> std_error;  // zero for the exact method
};

inline constexpr std::size_t kDefaultExactCap = 20;

// Exact Shapley values by enumeration of all 2^n coalitions.
ShapResult shapley_exact(const ValueFunction& f, std::size_t exact_cap = kDefaultExactCap);

// Monte Carlo over random permutations; each sample contributes every
// player's marginal gain at its insertion point.
ShapResult shapley_sampled(const ValueFunction& f, std::size_t n_samples, std::uint64_t seed);

struct RankingRow {
  std::string token;
  std::string pos;
  double mean_shap = 0.0;
  std::size_t support = 0;  // occurrences across the whole corpus
  std::size_t letters = 0;  // attributed letters containing the token
};

struct RankingGroup {
  std::string pos;
  std::vector<RankingRow> rows;
};

struct TokenRanking {
  Gender direction = Gender::male;  // male: mean_shap > 0, female: mean_shap < 0
  std::size_t min_support = 20;
  std::size_t top_k = 10;
  std::vector<RankingGroup> groups;

  std::set<std::string> tokens(const std::set<std::string>& pos_groups = {}) const;
};

struct RankOptions {
  std::size_t min_support = 20;
  std::size_t top_k = 10;
  std::optional<std::size_t> sample_size;
  std::size_t n_samples = 2000;
  std::size_t exact_cap = kDefaultExactCap;
  std::uint64_t seed = 0;
  std::string mask_symbol = "[MASK]";
  std::size_t background_size = 100;
};

// Exact attribution when the letter has at most exact_cap players, sampled
// (seeded by the letter id) otherwise. Tokens and letter id are filled in.
ShapResult explain_letter(const ClassifierModel& model, const Letter& letter, const RankOptions& options = {});

struct RankResult {
  TokenRanking male;
  TokenRanking female;
  std::size_t letters_attributed = 0;
  std::size_t exact_letters = 0;
  std::size_t sampled_letters = 0;
  std::optional<double> background_value;
  std::vector<RankingRow> all_rows;  // every scored token, sorted by token
};

// `background`, when given, supplies a seeded sample for the expected model
// output reported next to the rankings.
RankResult rank_tokens(const Corpus& corpus, const ClassifierModel& model, const PosLexicon& pos,
                       const RankOptions& options = {}, const Corpus* background = nullptr);

}  // namespace leakaudit
