#include "spikeseq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

namespace spikeseq::metrics {

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < classes_; ++i) t += at(i, i);
  return t;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          std::size_t n_classes) {
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("y_true and y_pred lengths differ");
  ConfusionMatrix cm(n_classes);
  for (std::size_t k = 0; k < y_true.size(); ++k) {
    const int t = y_true[k], p = y_pred[k];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= n_classes ||
        static_cast<std::size_t>(p) >= n_classes)
      throw std::invalid_argument("class index out of range at position " + std::to_string(k));
    ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return cm;
}

Summary summary(const ConfusionMatrix& cm) {
  const std::size_t c_count = cm.classes();
  const auto total = cm.total();
  if (total == 0) throw std::invalid_argument("confusion matrix is empty");

  Summary s;
  s.per_class.resize(c_count);
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < c_count; ++c) {
    std::uint64_t row = 0, col = 0;
    for (std::size_t k = 0; k < c_count; ++k) {
      row += cm.at(c, k);
      col += cm.at(k, c);
    }
    const auto tp = static_cast<double>(cm.at(c, c));
    ClassSummary& cs = s.per_class[c];
    cs.support = row;
    cs.precision = col > 0 ? tp / static_cast<double>(col) : 0.0;
    cs.recall = row > 0 ? tp / static_cast<double>(row) : 0.0;
    cs.f1 = (cs.precision + cs.recall) > 0.0
                ? 2.0 * cs.precision * cs.recall / (cs.precision + cs.recall)
                : 0.0;

    const double weight = static_cast<double>(row) / static_cast<double>(total);
    s.precision_weighted += weight * cs.precision;
    s.recall_weighted += weight * cs.recall;
    s.f1_weighted += weight * cs.f1;
    f1_sum += cs.f1;
  }
  s.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  s.f1_macro = f1_sum / static_cast<double>(c_count);
  return s;
}

double roc_auc_ovr(std::span<const int> y_true, const Matrix& scores) {
  if (y_true.size() != scores.rows())
    throw std::invalid_argument("y_true length does not match score rows");
  std::set<int> present(y_true.begin(), y_true.end());
  if (present.size() < 2)
    throw std::invalid_argument("ROC AUC needs at least 2 distinct classes present");
  for (double v : scores.data())
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite score");

  const std::size_t n = y_true.size();
  double auc_sum = 0.0;
  std::size_t eligible = 0;
  std::vector<std::pair<double, bool>> column(n);  // (score, is_positive)

  for (int c : present) {
    if (c < 0 || static_cast<std::size_t>(c) >= scores.cols())
      throw std::invalid_argument("class index out of score-column range");
    std::size_t positives = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool pos = y_true[k] == c;
      positives += pos;
      column[k] = {scores(k, static_cast<std::size_t>(c)), pos};
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) continue;

    // Mann-Whitney via midranks: AUC = (R+ - P(P+1)/2) / (P*N).
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double rank_sum_pos = 0.0;
    std::size_t k = 0;
    while (k < n) {
      std::size_t j = k;
      while (j + 1 < n && column[j + 1].first == column[k].first) ++j;
      const double midrank = 0.5 * static_cast<double>((k + 1) + (j + 1));
      for (std::size_t i = k; i <= j; ++i)
        if (column[i].second) rank_sum_pos += midrank;
      k = j + 1;
    }
    const double p = static_cast<double>(positives), q = static_cast<double>(negatives);
    auc_sum += (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q);
    ++eligible;
  }
  return auc_sum / static_cast<double>(eligible);
}

nlohmann::ordered_json report_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  j["precision_weighted"] = report.precision_weighted;
  j["recall_weighted"] = report.recall_weighted;
  j["f1_weighted"] = report.f1_weighted;
  j["f1_macro"] = report.f1_macro;
  j["roc_auc_ovr"] = report.roc_auc_ovr;
  j["train_time_seconds"] = report.train_time_seconds;
  j["conventions"] = {{"precision_recall", "weighted"},
                      {"f1_macro_classes", "all dataset classes"},
                      {"roc_auc", "one-vs-rest over classes present"}};
  return j;
}

nlohmann::ordered_json report_json(const MetricsReport& report, const Summary& detail,
                                   const std::vector<std::string>& class_names) {
  auto j = report_json(report);
  nlohmann::ordered_json per_class;
  for (std::size_t c = 0; c < detail.per_class.size(); ++c) {
    const ClassSummary& cs = detail.per_class[c];
    per_class[class_names.at(c)] = {{"precision", cs.precision},
                                    {"recall", cs.recall},
                                    {"f1", cs.f1},
                                    {"support", cs.support}};
  }
  j["per_class"] = std::move(per_class);
  return j;
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::vector<std::string>& class_names,
                         std::ostream& out) {
  out << "true\\pred";
  for (std::size_t j = 0; j < cm.classes(); ++j) out << ',' << class_names.at(j);
  out << '\n';
  for (std::size_t i = 0; i < cm.classes(); ++i) {
    out << class_names.at(i);
    for (std::size_t j = 0; j < cm.classes(); ++j) out << ',' << cm.at(i, j);
    out << '\n';
  }
}

}  // namespace spikeseq::metrics
