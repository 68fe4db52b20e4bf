#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "leakaudit/corpus.hpp"
#include "leakaudit/error.hpp"
#include "leakaudit/features.hpp"

namespace leakaudit {

enum class ModelKind { logistic, naive_bayes, external };
std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct TrainConfig {
  ModelKind kind = ModelKind::logistic;
  double learning_rate = 0.05;
  std::size_t epochs = 30;
  double l2 = 1e-3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t patience = 5;  // epochs without validation macro-F1 gain
  bool class_weighting = false;
  double threshold = 0.5;

  void validate() const;
};

class TrainingError : public DataError {
 public:
  using DataError::DataError;
};

// A gender classifier. Logistic and naive Bayes models are both stored in
// logit-linear form: logit = bias + sum_t weights[t] * count_t, so
// predict_proba = sigmoid(logit). External models carry precomputed
// probabilities keyed by letter id.
struct ClassifierModel {
  ModelKind kind = ModelKind::logistic;
  Tokenizer tokenizer;
  std::shared_ptr<const Vocabulary> vocab;
  std::vector<double> weights;
  double bias = 0.0;
  double threshold = 0.5;
  TrainConfig config;

  // Naive Bayes parameters, index 0 female / 1 male.
  std::array<double, 2> nb_log_prior{};
  std::array<std::vector<double>, 2> nb_log_likelihood;

  std::unordered_map<std::string, double> external_proba;

  std::size_t best_epoch = 0;
  double best_val_macro_f1 = 0.0;

  bool is_linear() const { return kind != ModelKind::external; }
  double logit(const DocVector& x) const;
  double proba_of_text(std::string_view text) const;
};

double sigmoid(double z);

// Hand-built logistic model over an explicit token list.
ClassifierModel make_logistic_model(const std::vector<std::pair<std::string, double>>& token_weights,
                                    double bias, Tokenizer tokenizer = {});

struct Example {
  DocVector x;
  double y = 0.0;       // 1 = male
  double weight = 1.0;  // per-class loss weight
};

// Mean weighted logistic loss over `batch` plus (l2 / 2) * ||w||^2 (bias
// unregularized). Fills the analytic gradient.
double logistic_loss_and_gradient(std::span<const double> weights, double bias, std::span<const Example> batch,
                                  double l2, std::vector<double>& grad_weights, double& grad_bias);

ClassifierModel train(const Corpus& train_set, const Corpus& val_set, const TrainConfig& config,
                      std::shared_ptr<const Vocabulary> vocab, const Tokenizer& tokenizer = {});

double predict_proba(const ClassifierModel& model, const Letter& letter);
Gender predict(const ClassifierModel& model, const Letter& letter);
// Tie goes to male: label 1 iff proba >= threshold.
Gender label_for(double proba, double threshold = 0.5);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  ClassMetrics female;
  ClassMetrics male;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::array<std::array<std::size_t, 2>, 2> confusion{};  // [true][predicted]
  std::size_t total = 0;
};

EvalReport evaluate_predictions(std::span<const Gender> truth, std::span<const Gender> predicted);
EvalReport evaluate(const ClassifierModel& model, const Corpus& test);

std::string serialize_model(const ClassifierModel& model);
ClassifierModel parse_model(std::string_view json_text);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

// JSON lines {"id": ..., "proba_male": ...}.
ClassifierModel load_external_model(const std::filesystem::path& path);

}  // namespace leakaudit
