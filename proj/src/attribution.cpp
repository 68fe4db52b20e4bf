#include "leakaudit/attribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "leakaudit/error.hpp"
#include "leakaudit/random.hpp"

namespace leakaudit {

void ValueFunction::walk(std::span<const std::size_t> order, std::span<double> out) const {
  Coalition members(players(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    members[order[k]] = 1;
    out[k] = value(members);
  }
}

MaskedValueFunction::MaskedValueFunction(const ClassifierModel& model, const Letter& letter,
                                         const std::string& mask_symbol) {
  if (!model.is_linear()) throw UsageError("token attribution needs a bag-of-words model, not an external one");
  const DocVector x = vectorize(letter.text, model.tokenizer, *model.vocab);
  const auto mask_index = model.vocab->find(mask_symbol);
  const double mask_weight = mask_index ? model.weights[*mask_index] : 0.0;
  base_logit_ = model.bias;
  for (const auto& [idx, count] : x.entries) {
    if (mask_index && idx == *mask_index) {
      base_logit_ += mask_weight * count;
      continue;
    }
    tokens_.push_back(model.vocab->token(idx));
    counts_.push_back(count);
    present_.push_back(model.weights[idx] * count);
    masked_.push_back(mask_weight * count);
  }
}

double MaskedValueFunction::value(const Coalition& members) const {
  double z = base_logit_;
  for (std::size_t i = 0; i < tokens_.size(); ++i) z += members[i] ? present_[i] : masked_[i];
  return sigmoid(z);
}

void MaskedValueFunction::walk(std::span<const std::size_t> order, std::span<double> out) const {
  double z = base_logit_;
  for (double m : masked_) z += m;
  for (std::size_t k = 0; k < order.size(); ++k) {
    z += present_[order[k]] - masked_[order[k]];
    out[k] = sigmoid(z);
  }
}

double MaskedValueFunction::full_value() const {
  double z = base_logit_;
  for (double p : present_) z += p;
  return sigmoid(z);
}

double background_mean(const ClassifierModel& model, const Corpus& background) {
  if (background.empty()) throw DataError("background sample is empty");
  double sum = 0.0;
  for (const auto& l : background.letters) sum += predict_proba(model, l);
  return sum / static_cast<double>(background.size());
}

MaskedValueFunction masked_value_function(const ClassifierModel& model, const Letter& letter,
                                          const Corpus& background, const std::string& mask_symbol) {
  MaskedValueFunction f(model, letter, mask_symbol);
  f.background_value = background_mean(model, background);
  return f;
}

Corpus sample_letters(const Corpus& corpus, std::size_t size, std::uint64_t seed) {
  Corpus out;
  out.provenance = corpus.provenance;
  std::vector<const Letter*> sorted;
  for (const auto& l : corpus.letters) sorted.push_back(&l);
  std::sort(sorted.begin(), sorted.end(), [](const Letter* a, const Letter* b) { return a->id < b->id; });
  if (size < sorted.size()) {
    Rng rng(seed);
    rng.shuffle(std::span<const Letter*>(sorted));
    sorted.resize(size);
    std::sort(sorted.begin(), sorted.end(), [](const Letter* a, const Letter* b) { return a->id < b->id; });
  }
  for (const Letter* l : sorted) out.letters.push_back(*l);
  return out;
}

ShapResult shapley_exact(const ValueFunction& f, std::size_t exact_cap) {
  const std::size_t n = f.players();
  if (n == 0) throw UsageError("attribution instance has no players");
  if (n > exact_cap || n >= 63) {
    throw UsageError("instance has " + std::to_string(n) + " players, above the exact cap of " +
                     std::to_string(exact_cap) + "; use the permutation estimator");
  }
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::vector<double> values(subsets);
  Coalition members(n, 0);
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    for (std::size_t i = 0; i < n; ++i) members[i] = static_cast<char>((mask >> i) & 1U);
    values[mask] = f.value(members);
  }
  // |S|! (n - |S| - 1)! / n! = 1 / (n * C(n-1, |S|)).
  std::vector<double> weight(n);
  double binom = 1.0;
  for (std::size_t s = 0; s < n; ++s) {
    weight[s] = 1.0 / (static_cast<double>(n) * binom);
    binom = binom * static_cast<double>(n - 1 - s) / static_cast<double>(s + 1);
  }

  ShapResult r;
  r.method = ShapMethod::exact;
  r.base_value = values[0];
  r.full_value = values[subsets - 1];
  r.phi.assign(n, 0.0);
  r.std_error.assign(n, 0.0);
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    const double w = weight[static_cast<std::size_t>(std::popcount(mask))];
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (mask & bit) continue;
      r.phi[i] += w * (values[mask | bit] - values[mask]);
    }
  }
  return r;
}

ShapResult shapley_sampled(const ValueFunction& f, std::size_t n_samples, std::uint64_t seed) {
  const std::size_t n = f.players();
  if (n == 0) throw UsageError("attribution instance has no players");
  if (n_samples == 0) throw UsageError("permutation estimator needs at least one sample");

  ShapResult r;
  r.method = ShapMethod::permutation;
  r.n_samples = n_samples;
  r.seed = seed;
  r.base_value = f.value(Coalition(n, 0));
  r.full_value = f.value(Coalition(n, 1));

  std::vector<double> mean(n, 0.0);
  std::vector<double> m2(n, 0.0);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<double> walk(n);
  Rng rng(seed);
  for (std::size_t t = 1; t <= n_samples; ++t) {
    rng.shuffle(std::span<std::size_t>(order));
    f.walk(order, walk);
    double prev = r.base_value;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = order[k];
      const double gain = walk[k] - prev;
      prev = walk[k];
      const double delta = gain - mean[i];
      mean[i] += delta / static_cast<double>(t);
      m2[i] += delta * (gain - mean[i]);
    }
  }
  r.phi = mean;
  r.std_error.assign(n, 0.0);
  if (n_samples > 1) {
    const double t = static_cast<double>(n_samples);
    for (std::size_t i = 0; i < n; ++i) r.std_error[i] = std::sqrt(m2[i] / (t - 1) / t);
  }
  return r;
}

std::set<std::string> TokenRanking::tokens(const std::set<std::string>& pos_groups) const {
  std::set<std::string> out;
  for (const auto& g : groups) {
    if (!pos_groups.empty() && !pos_groups.contains(g.pos)) continue;
    for (const auto& row : g.rows) out.insert(row.token);
  }
  return out;
}

ShapResult explain_letter(const ClassifierModel& model, const Letter& letter, const RankOptions& options) {
  MaskedValueFunction f(model, letter, options.mask_symbol);
  ShapResult r = f.players() <= options.exact_cap
                     ? shapley_exact(f, options.exact_cap)
                     : shapley_sampled(f, options.n_samples, derive_seed(options.seed, letter.id));
  r.letter_id = letter.id;
  r.tokens = f.tokens();
  return r;
}

RankResult rank_tokens(const Corpus& corpus, const ClassifierModel& model, const PosLexicon& pos,
                       const RankOptions& options, const Corpus* background) {
  if (corpus.empty()) throw DataError("cannot rank tokens over an empty corpus");
  if (!model.is_linear()) throw UsageError("token attribution needs a bag-of-words model, not an external one");

  std::map<std::string, std::size_t> support;
  for (const auto& l : corpus.letters) {
    for (const auto& t : model.tokenizer.tokenize(l.text)) support[t] += 1;
  }

  const Corpus attributed = sample_letters(corpus, options.sample_size.value_or(corpus.size()),
                                           derive_seed(options.seed, "shap-sample"));
  RankResult result;
  if (background != nullptr && !background->empty()) {
    result.background_value = background_mean(
        model, sample_letters(*background, options.background_size, derive_seed(options.seed, "shap-background")));
  }
  std::map<std::string, std::pair<double, std::size_t>> accum;  // sum phi, letters
  for (const auto& letter : attributed.letters) {
    if (MaskedValueFunction(model, letter, options.mask_symbol).players() == 0) continue;
    const ShapResult r = explain_letter(model, letter, options);
    ++(r.method == ShapMethod::exact ? result.exact_letters : result.sampled_letters);
    ++result.letters_attributed;
    for (std::size_t i = 0; i < r.tokens.size(); ++i) {
      auto& a = accum[r.tokens[i]];
      a.first += r.phi[i];
      a.second += 1;
    }
  }

  std::map<std::string, std::vector<RankingRow>> by_pos;
  for (const auto& [token, a] : accum) {
    RankingRow row;
    row.token = token;
    row.pos = pos.tag(token);
    row.mean_shap = a.first / static_cast<double>(a.second);
    row.support = support[token];
    row.letters = a.second;
    result.all_rows.push_back(row);
    if (row.support >= options.min_support && !model.tokenizer.is_reserved(token)) {
      by_pos[row.pos].push_back(row);
    }
  }

  std::set<std::string> groups;
  for (const auto& [g, _] : by_pos) groups.insert(g);
  for (TokenRanking* ranking : {&result.male, &result.female}) {
    ranking->direction = ranking == &result.male ? Gender::male : Gender::female;
    ranking->min_support = options.min_support;
    ranking->top_k = options.top_k;
    for (const auto& group : ordered_pos_groups(groups)) {
      RankingGroup g;
      g.pos = group;
      for (const auto& row : by_pos[group]) {
        if ((ranking->direction == Gender::male && row.mean_shap > 0) ||
            (ranking->direction == Gender::female && row.mean_shap < 0)) {
          g.rows.push_back(row);
        }
      }
      std::sort(g.rows.begin(), g.rows.end(), [](const RankingRow& a, const RankingRow& b) {
        if (std::abs(a.mean_shap) != std::abs(b.mean_shap)) return std::abs(a.mean_shap) > std::abs(b.mean_shap);
        return a.token < b.token;
      });
      if (g.rows.size() > options.top_k) g.rows.resize(options.top_k);
      ranking->groups.push_back(std::move(g));
    }
  }
  return result;
}

}  // namespace leakaudit
