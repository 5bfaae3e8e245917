#include "pqlm/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pqlm/textprep.hpp"

namespace pqlm {

namespace {

void check_lengths(const std::vector<int>& preds, const std::vector<int>& golds,
                   const char* what) {
  if (preds.size() != golds.size()) {
    throw std::invalid_argument(std::string(what) + ": prediction/gold length mismatch");
  }
  if (preds.empty()) throw std::invalid_argument(std::string(what) + ": empty inputs");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || golds[i] < 0) {
      throw std::invalid_argument(std::string(what) + ": negative label");
    }
  }
}

int label_range(const std::vector<int>& preds, const std::vector<int>& golds) {
  int mx = 0;
  for (int p : preds) mx = std::max(mx, p);
  for (int g : golds) mx = std::max(mx, g);
  return mx + 1;
}

}  // namespace

double accuracy(const std::vector<int>& preds, const std::vector<int>& golds) {
  check_lengths(preds, golds, "accuracy");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == golds[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

std::vector<ClassMetrics> per_class_metrics(const std::vector<int>& preds,
                                            const std::vector<int>& golds, int n_classes) {
  check_lengths(preds, golds, "per_class_metrics");
  if (n_classes < 1) throw std::invalid_argument("per_class_metrics: n_classes must be positive");

  std::vector<std::size_t> tp(n_classes, 0), pred_n(n_classes, 0), gold_n(n_classes, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= n_classes || golds[i] >= n_classes) {
      throw std::invalid_argument("per_class_metrics: label outside class range");
    }
    ++pred_n[static_cast<std::size_t>(preds[i])];
    ++gold_n[static_cast<std::size_t>(golds[i])];
    if (preds[i] == golds[i]) ++tp[static_cast<std::size_t>(preds[i])];
  }

  std::vector<ClassMetrics> out(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    auto& m = out[static_cast<std::size_t>(c)];
    const auto cs = static_cast<std::size_t>(c);
    m.support = gold_n[cs];
    m.precision = pred_n[cs] == 0
                      ? 0.0
                      : static_cast<double>(tp[cs]) / static_cast<double>(pred_n[cs]);
    m.recall = gold_n[cs] == 0
                   ? 0.0
                   : static_cast<double>(tp[cs]) / static_cast<double>(gold_n[cs]);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return out;
}

double weighted_f1(const std::vector<int>& preds, const std::vector<int>& golds, int n_classes) {
  if (n_classes == 0) {
    check_lengths(preds, golds, "weighted_f1");
    n_classes = label_range(preds, golds);
  }
  const auto per_class = per_class_metrics(preds, golds, n_classes);
  double sum = 0.0;
  for (const auto& m : per_class) sum += static_cast<double>(m.support) * m.f1;
  return sum / static_cast<double>(golds.size());
}

EvalReport evaluate_predictions(const std::vector<int>& preds, const std::vector<int>& golds,
                                int n_classes) {
  EvalReport report;
  report.per_class = per_class_metrics(preds, golds, n_classes);
  report.accuracy = accuracy(preds, golds);
  double sum = 0.0;
  for (const auto& m : report.per_class) sum += static_cast<double>(m.support) * m.f1;
  report.weighted_f1 = sum / static_cast<double>(golds.size());
  report.n_docs = golds.size();
  return report;
}

std::string metrics_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["weighted_f1"] = report.weighted_f1;
  j["n_docs"] = report.n_docs;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    const std::string key = report.per_class.size() == kNumSentiments
                                ? sentiment_name(static_cast<Sentiment>(c))
                                : "class_" + std::to_string(c);
    per_class[key] = {{"precision", m.precision},
                      {"recall", m.recall},
                      {"f1", m.f1},
                      {"support", m.support}};
  }
  j["per_class"] = per_class;
  return j.dump(2) + "\n";
}

void write_metrics_json(const std::string& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_metrics_json: cannot open " + path);
  out << metrics_to_json(report);
  if (!out) throw std::runtime_error("write_metrics_json: write failed for " + path);
}

}  // namespace pqlm
