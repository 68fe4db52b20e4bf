#include "leakaudit/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "leakaudit/error.hpp"
#include "leakaudit/random.hpp"
#include "leakaudit/text.hpp"

namespace leakaudit {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::logistic: return "logistic";
    case ModelKind::naive_bayes: return "naive_bayes";
    case ModelKind::external: return "external";
  }
  return "logistic";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "logistic") return ModelKind::logistic;
  if (s == "naive_bayes" || s == "nb") return ModelKind::naive_bayes;
  if (s == "external") return ModelKind::external;
  throw UsageError("unknown model kind '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw UsageError("learning rate must be positive");
  if (epochs == 0) throw UsageError("epochs must be positive");
  if (batch_size == 0) throw UsageError("batch size must be positive");
  if (!(l2 >= 0)) throw UsageError("l2 penalty must be nonnegative");
  if (!(threshold > 0 && threshold < 1)) throw UsageError("threshold must be in (0, 1)");
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Gender label_for(double proba, double threshold) { return proba >= threshold ? Gender::male : Gender::female; }

double ClassifierModel::logit(const DocVector& x) const {
  double z = bias;
  for (const auto& [idx, count] : x.entries) z += weights[idx] * static_cast<double>(count);
  return z;
}

double ClassifierModel::proba_of_text(std::string_view text) const {
  if (!is_linear()) throw UsageError("external models cannot score arbitrary text");
  return sigmoid(logit(vectorize(text, tokenizer, *vocab)));
}

double predict_proba(const ClassifierModel& model, const Letter& letter) {
  if (model.kind == ModelKind::external) {
    auto it = model.external_proba.find(letter.id);
    if (it == model.external_proba.end()) {
      throw DataError("no external probability for letter '" + letter.id + "'");
    }
    return it->second;
  }
  return model.proba_of_text(letter.text);
}

Gender predict(const ClassifierModel& model, const Letter& letter) {
  return label_for(predict_proba(model, letter), model.threshold);
}

ClassifierModel make_logistic_model(const std::vector<std::pair<std::string, double>>& token_weights,
                                    double bias, Tokenizer tokenizer) {
  std::vector<std::string> tokens;
  for (const auto& [t, _] : token_weights) tokens.push_back(t);
  ClassifierModel m;
  m.kind = ModelKind::logistic;
  m.tokenizer = std::move(tokenizer);
  m.vocab = std::make_shared<const Vocabulary>(Vocabulary::from_tokens(std::move(tokens)));
  for (const auto& [_, w] : token_weights) m.weights.push_back(w);
  m.bias = bias;
  return m;
}

double logistic_loss_and_gradient(std::span<const double> weights, double bias, std::span<const Example> batch,
                                  double l2, std::vector<double>& grad_weights, double& grad_bias) {
  grad_weights.assign(weights.size(), 0.0);
  grad_bias = 0.0;
  double loss = 0.0;
  const double inv_n = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    double z = bias;
    for (const auto& [idx, count] : ex.x.entries) z += weights[idx] * static_cast<double>(count);
    // -[y log s + (1-y) log(1-s)] written in overflow-safe form.
    const double nll = std::max(z, 0.0) - ex.y * z + std::log1p(std::exp(-std::abs(z)));
    loss += ex.weight * nll * inv_n;
    const double residual = ex.weight * (sigmoid(z) - ex.y) * inv_n;
    for (const auto& [idx, count] : ex.x.entries) grad_weights[idx] += residual * static_cast<double>(count);
    grad_bias += residual;
  }
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    norm_sq += weights[i] * weights[i];
    grad_weights[i] += l2 * weights[i];
  }
  return loss + 0.5 * l2 * norm_sq;
}

namespace {

std::vector<Example> make_examples(const Corpus& corpus, const Tokenizer& tokenizer, const Vocabulary& vocab,
                                   bool class_weighting) {
  const ClassCounts counts = corpus.class_counts();
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const auto& l : corpus.letters) {
    Example ex;
    ex.x = vectorize(l, tokenizer, vocab);
    ex.y = l.gender == Gender::male ? 1.0 : 0.0;
    if (class_weighting) {
      ex.weight = static_cast<double>(counts.total()) / (2.0 * static_cast<double>(counts.of(l.gender)));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

double macro_f1_on(const ClassifierModel& model, const std::vector<Example>& examples) {
  std::vector<Gender> truth;
  std::vector<Gender> pred;
  for (const auto& ex : examples) {
    truth.push_back(ex.y > 0.5 ? Gender::male : Gender::female);
    pred.push_back(label_for(sigmoid(model.logit(ex.x)), model.threshold));
  }
  return evaluate_predictions(truth, pred).macro_f1;
}

void train_logistic(ClassifierModel& model, const std::vector<Example>& train_ex,
                    const std::vector<Example>& val_ex) {
  const TrainConfig& cfg = model.config;
  const std::size_t dim = model.vocab->size();
  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  std::vector<double> gw;
  double gb = 0.0;
  std::vector<std::size_t> order(train_ex.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Example> batch;
  Rng rng(cfg.seed);

  bool have_best = false;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(train_ex[order[k]]);
      const double loss = logistic_loss_and_gradient(w, b, batch, cfg.l2, gw, gb);
      if (!std::isfinite(loss)) {
        throw TrainingError("logistic training diverged at epoch " + std::to_string(epoch));
      }
      for (std::size_t i = 0; i < dim; ++i) w[i] -= cfg.learning_rate * gw[i];
      b -= cfg.learning_rate * gb;
    }
    if (!std::isfinite(b)) throw TrainingError("logistic training diverged at epoch " + std::to_string(epoch));

    ClassifierModel candidate = model;
    candidate.weights = w;
    candidate.bias = b;
    const double score = macro_f1_on(candidate, val_ex.empty() ? train_ex : val_ex);
    if (!have_best || score > model.best_val_macro_f1) {
      model.weights = w;
      model.bias = b;
      model.best_epoch = epoch;
      model.best_val_macro_f1 = score;
      have_best = true;
      stale = 0;
    } else if (++stale >= cfg.patience && cfg.patience > 0) {
      break;
    }
  }
}

void train_naive_bayes(ClassifierModel& model, const std::vector<Example>& train_ex,
                       const std::vector<Example>& val_ex) {
  const std::size_t dim = model.vocab->size();
  std::array<std::vector<double>, 2> counts{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  std::array<double, 2> totals{};
  std::array<double, 2> docs{};
  for (const auto& ex : train_ex) {
    const int c = ex.y > 0.5 ? 1 : 0;
    docs[c] += 1;
    for (const auto& [idx, count] : ex.x.entries) {
      counts[c][idx] += count;
      totals[c] += count;
    }
  }
  const double n_docs = docs[0] + docs[1];
  for (int c = 0; c < 2; ++c) {
    model.nb_log_prior[c] = std::log(docs[c] / n_docs);
    model.nb_log_likelihood[c].resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      model.nb_log_likelihood[c][i] = std::log((counts[c][i] + 1.0) / (totals[c] + static_cast<double>(dim)));
    }
  }
  model.weights.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    model.weights[i] = model.nb_log_likelihood[1][i] - model.nb_log_likelihood[0][i];
  }
  model.bias = model.nb_log_prior[1] - model.nb_log_prior[0];
  model.best_epoch = 1;
  model.best_val_macro_f1 = macro_f1_on(model, val_ex.empty() ? train_ex : val_ex);
}

}  // namespace

ClassifierModel train(const Corpus& train_set, const Corpus& val_set, const TrainConfig& config,
                      std::shared_ptr<const Vocabulary> vocab, const Tokenizer& tokenizer) {
  config.validate();
  if (config.kind == ModelKind::external) throw UsageError("external models are loaded, not trained");
  if (!vocab || vocab->empty()) throw DataError("training needs a nonempty vocabulary");
  const ClassCounts counts = train_set.class_counts();
  if (counts.female == 0 || counts.male == 0) throw TrainingError("training set contains a single class");

  ClassifierModel model;
  model.kind = config.kind;
  model.tokenizer = tokenizer;
  model.vocab = std::move(vocab);
  model.threshold = config.threshold;
  model.config = config;

  const auto train_ex = make_examples(train_set, tokenizer, *model.vocab, config.class_weighting);
  const auto val_ex = make_examples(val_set, tokenizer, *model.vocab, false);
  if (config.kind == ModelKind::logistic) {
    train_logistic(model, train_ex, val_ex);
  } else {
    train_naive_bayes(model, train_ex, val_ex);
  }
  return model;
}

std::string serialize_model(const ClassifierModel& model) {
  ordered_json j;
  j["format"] = "leakaudit-model";
  j["version"] = 1;
  j["kind"] = std::string(to_string(model.kind));
  j["threshold"] = model.threshold;
  if (model.kind == ModelKind::external) {
    std::vector<std::pair<std::string, double>> rows(model.external_proba.begin(), model.external_proba.end());
    std::sort(rows.begin(), rows.end());
    ordered_json probs = ordered_json::object();
    for (const auto& [id, p] : rows) probs[id] = p;
    j["external_proba"] = std::move(probs);
    return j.dump(1) + "\n";
  }
  j["vocab_hash"] = model.vocab->hash();
  j["tokenizer"] = {{"lowercase", model.tokenizer.lowercase},
                    {"max_tokens", model.tokenizer.max_tokens},
                    {"reserved", std::vector<std::string>(model.tokenizer.reserved.begin(),
                                                          model.tokenizer.reserved.end())}};
  const auto& c = model.config;
  j["config"] = {{"learning_rate", c.learning_rate}, {"epochs", c.epochs},       {"l2", c.l2},
                 {"batch_size", c.batch_size},       {"seed", c.seed},           {"patience", c.patience},
                 {"class_weighting", c.class_weighting}};
  j["best_epoch"] = model.best_epoch;
  j["best_val_macro_f1"] = model.best_val_macro_f1;
  j["bias"] = model.bias;
  j["vocab"] = model.vocab->tokens();
  j["weights"] = model.weights;
  if (model.kind == ModelKind::naive_bayes) {
    j["naive_bayes"] = {{"log_prior", model.nb_log_prior},
                        {"log_likelihood_female", model.nb_log_likelihood[0]},
                        {"log_likelihood_male", model.nb_log_likelihood[1]}};
  }
  return j.dump(1) + "\n";
}

ClassifierModel parse_model(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
  ClassifierModel m;
  try {
    if (j.value("format", std::string()) != "leakaudit-model") throw DataError("not a leakaudit model file");
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.threshold = j.value("threshold", 0.5);
    if (m.kind == ModelKind::external) {
      for (const auto& [id, p] : j.at("external_proba").items()) m.external_proba.emplace(id, p.get<double>());
      return m;
    }
    const auto& tok = j.at("tokenizer");
    m.tokenizer.lowercase = tok.at("lowercase").get<bool>();
    m.tokenizer.max_tokens = tok.at("max_tokens").get<std::size_t>();
    auto reserved = tok.at("reserved").get<std::vector<std::string>>();
    m.tokenizer.reserved = std::set<std::string>(reserved.begin(), reserved.end());
    const auto& c = j.at("config");
    m.config.kind = m.kind;
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.epochs = c.at("epochs").get<std::size_t>();
    m.config.l2 = c.at("l2").get<double>();
    m.config.batch_size = c.at("batch_size").get<std::size_t>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.patience = c.at("patience").get<std::size_t>();
    m.config.class_weighting = c.at("class_weighting").get<bool>();
    m.config.threshold = m.threshold;
    m.best_epoch = j.value("best_epoch", std::size_t{0});
    m.best_val_macro_f1 = j.value("best_val_macro_f1", 0.0);
    m.bias = j.at("bias").get<double>();
    m.vocab = std::make_shared<const Vocabulary>(Vocabulary::from_tokens(j.at("vocab").get<std::vector<std::string>>()));
    m.weights = j.at("weights").get<std::vector<double>>();
    if (m.weights.size() != m.vocab->size()) throw DataError("model weight count does not match vocabulary size");
    if (j.at("vocab_hash").get<std::string>() != m.vocab->hash()) throw DataError("model vocabulary hash mismatch");
    if (m.kind == ModelKind::naive_bayes) {
      const auto& nb = j.at("naive_bayes");
      m.nb_log_prior = nb.at("log_prior").get<std::array<double, 2>>();
      m.nb_log_likelihood[0] = nb.at("log_likelihood_female").get<std::vector<double>>();
      m.nb_log_likelihood[1] = nb.at("log_likelihood_male").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid model file: ") + e.what());
  }
  return m;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

ClassifierModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

ClassifierModel load_external_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open external probabilities '" + path.string() + "'");
  ClassifierModel m;
  m.kind = ModelKind::external;
  m.config.kind = ModelKind::external;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    try {
      const json j = json::parse(raw);
      const double p = j.at("proba_male").get<double>();
      if (!(p >= 0.0 && p <= 1.0)) throw ParseError(line_no, "proba_male must be in [0, 1]");
      if (!m.external_proba.emplace(j.at("id").get<std::string>(), p).second) {
        throw ParseError(line_no, "duplicate id");
      }
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return m;
}

}  // namespace leakaudit
