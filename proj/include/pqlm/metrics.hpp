#pragma once

#include <string>
#include <vector>

namespace pqlm {

// Fraction exactly correct.
double accuracy(const std::vector<int>& preds, const std::vector<int>& golds);

struct ClassMetrics {
  double precision = 0.0; // 0/0 counts as 0
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

std::vector<ClassMetrics> per_class_metrics(const std::vector<int>& preds,
                                            const std::vector<int>& golds, int n_classes);

// Support-weighted mean of per-class F1. Classes absent from golds carry
// zero support and drop out.
double weighted_f1(const std::vector<int>& preds, const std::vector<int>& golds,
                   int n_classes = 0); // 0 = derive from the labels seen

struct EvalReport {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  std::size_t n_docs = 0;
};

EvalReport evaluate_predictions(const std::vector<int>& preds, const std::vector<int>& golds,
                                int n_classes);

// {accuracy, weighted_f1, per_class: {<label>: {precision, recall, f1,
// support}}} with the 4-way sentiment names when n_classes is 4.
std::string metrics_to_json(const EvalReport& report);
void write_metrics_json(const std::string& path, const EvalReport& report);

}  // namespace pqlm
