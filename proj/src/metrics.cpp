#include "leakaudit/error.hpp"
#include "leakaudit/model.hpp"

namespace leakaudit {

namespace {

double safe_div(double num, double den) { return den > 0 ? num / den : 0.0; }

ClassMetrics class_metrics(const std::array<std::array<std::size_t, 2>, 2>& cm, int c) {
  const int o = 1 - c;
  const double tp = static_cast<double>(cm[c][c]);
  const double fp = static_cast<double>(cm[o][c]);
  const double fn = static_cast<double>(cm[c][o]);
  ClassMetrics m;
  m.precision = safe_div(tp, tp + fp);
  m.recall = safe_div(tp, tp + fn);
  m.f1 = safe_div(2 * m.precision * m.recall, m.precision + m.recall);
  m.support = cm[c][0] + cm[c][1];
  return m;
}

}  // namespace

EvalReport evaluate_predictions(std::span<const Gender> truth, std::span<const Gender> predicted) {
  if (truth.size() != predicted.size()) throw InvariantError("prediction and label counts differ");
  EvalReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    r.confusion[static_cast<int>(truth[i])][static_cast<int>(predicted[i])] += 1;
  }
  r.total = truth.size();
  r.female = class_metrics(r.confusion, 0);
  r.male = class_metrics(r.confusion, 1);
  r.accuracy = safe_div(static_cast<double>(r.confusion[0][0] + r.confusion[1][1]), static_cast<double>(r.total));
  r.macro_precision = (r.female.precision + r.male.precision) / 2;
  r.macro_recall = (r.female.recall + r.male.recall) / 2;
  r.macro_f1 = (r.female.f1 + r.male.f1) / 2;
  const double wf = safe_div(static_cast<double>(r.female.support), static_cast<double>(r.total));
  const double wm = safe_div(static_cast<double>(r.male.support), static_cast<double>(r.total));
  r.weighted_precision = wf * r.female.precision + wm * r.male.precision;
  r.weighted_recall = wf * r.female.recall + wm * r.male.recall;
  r.weighted_f1 = wf * r.female.f1 + wm * r.male.f1;
  return r;
}

EvalReport evaluate(const ClassifierModel& model, const Corpus& test) {
  if (test.empty()) throw DataError("evaluation corpus is empty");
  std::vector<Gender> truth;
  std::vector<Gender> predicted;
  truth.reserve(test.size());
  predicted.reserve(test.size());
  for (const auto& l : test.letters) {
    truth.push_back(l.gender);
    predicted.push_back(predict(model, l));
  }
  return evaluate_predictions(truth, predicted);
}

}  // namespace leakaudit
