#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spikeseq/matrix.hpp"

#include "json.hpp"

namespace spikeseq::metrics {

// C x C count matrix; entry (i,j) = records with true class i predicted j.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes)
      : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return classes_; }
  std::uint64_t& at(std::size_t i, std::size_t j) { return counts_[i * classes_ + j]; }
  std::uint64_t at(std::size_t i, std::size_t j) const { return counts_[i * classes_ + j]; }
  std::uint64_t total() const;
  std::uint64_t trace() const;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

struct ClassSummary {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

// Accuracy plus the weighted/macro aggregates. Per-class values with an empty
// denominator are 0 (never-predicted classes are penalized, not skipped), and
// macro F1 averages over all C classes regardless of split support.
struct Summary {
  double accuracy = 0.0;
  double precision_weighted = 0.0;
  double recall_weighted = 0.0;
  double f1_weighted = 0.0;
  double f1_macro = 0.0;
  std::vector<ClassSummary> per_class;
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision_weighted = 0.0;
  double recall_weighted = 0.0;
  double f1_weighted = 0.0;
  double f1_macro = 0.0;
  double roc_auc_ovr = 0.0;
  double train_time_seconds = 0.0;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          std::size_t n_classes);

Summary summary(const ConfusionMatrix& cm);

// One-vs-rest ROC AUC: per-class binary AUC of scores column c against
// (y_true == c), rank/Mann-Whitney formulation with ties counted one half,
// averaged over the classes present in y_true.
double roc_auc_ovr(std::span<const int> y_true, const Matrix& scores);

nlohmann::ordered_json report_json(const MetricsReport& report);
nlohmann::ordered_json report_json(const MetricsReport& report, const Summary& detail,
                                   const std::vector<std::string>& class_names);

void write_confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names,
                         std::ostream& out);

}  // namespace spikeseq::metrics
