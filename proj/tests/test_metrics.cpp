#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "spikeseq/metrics.hpp"
#include "spikeseq/rng.hpp"

using namespace spikeseq;

namespace {

// All positive-negative pairs, ties worth one half.
double pairwise_auc_ovr(const std::vector<int>& y, const Matrix& scores) {
  std::vector<int> present(y);
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  double total = 0.0;
  std::size_t eligible = 0;
  for (int c : present) {
    std::vector<double> pos, neg;
    for (std::size_t k = 0; k < y.size(); ++k)
      (y[k] == c ? pos : neg).push_back(scores(k, static_cast<std::size_t>(c)));
    if (pos.empty() || neg.empty()) continue;
    double wins = 0.0;
    for (double p : pos)
      for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
    total += wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
    ++eligible;
  }
  return total / static_cast<double>(eligible);
}

metrics::ConfusionMatrix random_cm(Rng& rng) {
  const std::size_t c = 1 + rng.below(8);
  metrics::ConfusionMatrix cm(c);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      cm.at(i, j) = rng.below(20);
      total += cm.at(i, j);
    }
  if (total == 0) cm.at(0, 0) = 1;
  return cm;
}

}  // namespace

TEST_CASE("confusion counts true/predicted pairs") {
  const std::vector<int> perfect{0, 1, 2};
  auto cm = metrics::confusion(perfect, perfect, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(cm.at(i, j) == (i == j ? 1u : 0u));

  const std::vector<int> t{0, 0}, p{1, 1};
  auto cm2 = metrics::confusion(t, p, 2);
  CHECK(cm2.at(0, 1) == 2);
  CHECK(cm2.total() == 2);
  CHECK(cm2.trace() == 0);

  auto empty = metrics::confusion({}, {}, 3);
  CHECK(empty.total() == 0);
}

TEST_CASE("confusion rejects malformed inputs") {
  const std::vector<int> a{0, 1}, b{0};
  CHECK_THROWS_AS(metrics::confusion(a, b, 2), std::invalid_argument);
  const std::vector<int> big{0, 2};
  CHECK_THROWS_AS(metrics::confusion(big, big, 2), std::invalid_argument);
}

TEST_CASE("summary of a perfect diagonal is all ones") {
  metrics::ConfusionMatrix cm(3);
  cm.at(0, 0) = 4;
  cm.at(1, 1) = 2;
  cm.at(2, 2) = 6;
  const auto s = metrics::summary(cm);
  CHECK(s.accuracy == 1.0);
  CHECK(s.precision_weighted == 1.0);
  CHECK(s.recall_weighted == 1.0);
  CHECK(s.f1_weighted == 1.0);
  CHECK(s.f1_macro == 1.0);
}

TEST_CASE("summary reproduces the hand-computed two-class case") {
  // cm = [[2,0],[1,1]]: acc 3/4, P = [2/3, 1], R = [1, 1/2], F1 = [0.8, 2/3]
  metrics::ConfusionMatrix cm(2);
  cm.at(0, 0) = 2;
  cm.at(1, 0) = 1;
  cm.at(1, 1) = 1;
  const auto s = metrics::summary(cm);
  CHECK(std::abs(s.accuracy - 0.75) <= 1e-12);
  CHECK(std::abs(s.per_class[0].precision - 2.0 / 3.0) <= 1e-12);
  CHECK(std::abs(s.per_class[1].precision - 1.0) <= 1e-12);
  CHECK(std::abs(s.per_class[0].recall - 1.0) <= 1e-12);
  CHECK(std::abs(s.per_class[1].recall - 0.5) <= 1e-12);
  CHECK(std::abs(s.per_class[0].f1 - 0.8) <= 1e-12);
  CHECK(std::abs(s.per_class[1].f1 - 2.0 / 3.0) <= 1e-12);
  const double f1w = (2.0 * 0.8 + 2.0 * (2.0 / 3.0)) / 4.0;
  CHECK(std::abs(s.f1_weighted - f1w) <= 1e-12);
  CHECK(std::abs(s.f1_macro - f1w) <= 1e-12);  // equal supports here
}

TEST_CASE("zero-support classes score zero and still enter the macro mean") {
  metrics::ConfusionMatrix cm(3);
  cm.at(0, 0) = 2;
  cm.at(1, 1) = 2;
  const auto s = metrics::summary(cm);  // class 2 absent
  CHECK(s.per_class[2].precision == 0.0);
  CHECK(s.per_class[2].recall == 0.0);
  CHECK(s.per_class[2].f1 == 0.0);
  CHECK(std::abs(s.f1_macro - 2.0 / 3.0) <= 1e-12);
  CHECK(s.f1_weighted == 1.0);  // weighted ignores the empty class
}

TEST_CASE("weighted recall equals accuracy on random confusion matrices") {
  Rng rng(71);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cm = random_cm(rng);
    const auto s = metrics::summary(cm);
    CHECK(std::abs(s.recall_weighted - s.accuracy) <= 1e-12);
  }
}

TEST_CASE("roc_auc_ovr handles the perfect and all-tied cases") {
  Matrix perfect(4, 2);
  const std::vector<int> y{0, 0, 1, 1};
  perfect(0, 0) = 0.9;
  perfect(1, 0) = 0.8;
  perfect(2, 0) = 0.1;
  perfect(3, 0) = 0.2;
  for (std::size_t k = 0; k < 4; ++k) perfect(k, 1) = 1.0 - perfect(k, 0);
  CHECK(metrics::roc_auc_ovr(y, perfect) == 1.0);

  Matrix tied(4, 2, 0.5);
  CHECK(metrics::roc_auc_ovr(y, tied) == 0.5);
}

TEST_CASE("roc_auc_ovr reproduces the hand-counted binary example") {
  const std::vector<int> y{1, 0, 1, 0};
  Matrix scores(4, 2);
  const double s1[4] = {0.9, 0.8, 0.3, 0.2};
  for (std::size_t k = 0; k < 4; ++k) {
    scores(k, 1) = s1[k];
    scores(k, 0) = 1.0 - s1[k];
  }
  // concordant pairs for class 1: 3 of 4
  CHECK(metrics::roc_auc_ovr(y, scores) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("roc_auc_ovr needs two classes present") {
  Matrix scores(3, 2, 0.5);
  const std::vector<int> y{1, 1, 1};
  CHECK_THROWS_AS(metrics::roc_auc_ovr(y, scores), std::invalid_argument);
}

TEST_CASE("rank-based AUC equals the pairwise brute force on random instances") {
  Rng rng(83);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t classes = 2 + rng.below(4);
    const std::size_t n = 2 + rng.below(199);
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(classes));
    y[0] = 0;
    y[1] = 1;  // at least two classes present
    Matrix scores(n, classes);
    const bool quantized = rng.below(2) == 0;  // force ties half the time
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t c = 0; c < classes; ++c)
        scores(k, c) = quantized ? static_cast<double>(rng.below(4)) / 4.0 : rng.uniform01();

    const double fast = metrics::roc_auc_ovr(y, scores);
    const double slow = pairwise_auc_ovr(y, scores);
    CHECK(std::abs(fast - slow) <= 1e-12);
  }
}

TEST_CASE("strictly increasing score transforms leave the AUC unchanged") {
  Rng rng(97);
  const std::size_t n = 60, classes = 3;
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(classes));
  y[0] = 0;
  y[1] = 1;
  y[2] = 2;
  Matrix scores(n, classes);
  for (auto& v : scores.data()) v = rng.uniform(-2.0, 2.0);

  Matrix transformed = scores;
  for (auto& v : transformed.data()) v = v * v * v + std::atan(v);

  CHECK(std::abs(metrics::roc_auc_ovr(y, scores) - metrics::roc_auc_ovr(y, transformed)) <=
        1e-12);
}

TEST_CASE("consistent class relabeling leaves every metric unchanged") {
  Rng rng(103);
  const std::size_t classes = 4, n = 80;
  std::vector<int> y(n), pred(n);
  Matrix scores(n, classes);
  for (std::size_t k = 0; k < n; ++k) {
    y[k] = static_cast<int>(rng.below(classes));
    pred[k] = static_cast<int>(rng.below(classes));
    for (std::size_t c = 0; c < classes; ++c) scores(k, c) = rng.uniform01();
  }
  for (std::size_t c = 0; c < classes; ++c) y[c] = static_cast<int>(c);

  const std::vector<int> perm{2, 0, 3, 1};
  std::vector<int> y2(n), pred2(n);
  Matrix scores2(n, classes);
  for (std::size_t k = 0; k < n; ++k) {
    y2[k] = perm[static_cast<std::size_t>(y[k])];
    pred2[k] = perm[static_cast<std::size_t>(pred[k])];
    for (std::size_t c = 0; c < classes; ++c)
      scores2(k, static_cast<std::size_t>(perm[c])) = scores(k, c);
  }

  const auto s1 = metrics::summary(metrics::confusion(y, pred, classes));
  const auto s2 = metrics::summary(metrics::confusion(y2, pred2, classes));
  CHECK(s1.accuracy == s2.accuracy);
  CHECK(std::abs(s1.precision_weighted - s2.precision_weighted) <= 1e-12);
  CHECK(std::abs(s1.recall_weighted - s2.recall_weighted) <= 1e-12);
  CHECK(std::abs(s1.f1_weighted - s2.f1_weighted) <= 1e-12);
  CHECK(std::abs(s1.f1_macro - s2.f1_macro) <= 1e-12);
  CHECK(std::abs(metrics::roc_auc_ovr(y, scores) - metrics::roc_auc_ovr(y2, scores2)) <= 1e-12);
}

TEST_CASE("accuracy equals the mean correct-prediction indicator") {
  Rng rng(109);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t classes = 2 + rng.below(5);
    const std::size_t n = 1 + rng.below(100);
    std::vector<int> y(n), p(n);
    for (std::size_t k = 0; k < n; ++k) {
      y[k] = static_cast<int>(rng.below(classes));
      p[k] = static_cast<int>(rng.below(classes));
    }
    double indicator = 0.0;
    for (std::size_t k = 0; k < n; ++k) indicator += y[k] == p[k];
    indicator /= static_cast<double>(n);
    const auto s = metrics::summary(metrics::confusion(y, p, classes));
    CHECK(std::abs(s.accuracy - indicator) <= 1e-12);
  }
}

TEST_CASE("report JSON carries the seven fields") {
  metrics::MetricsReport r{0.8, 0.7, 0.6, 0.65, 0.5, 0.9, 12.5};
  const auto j = metrics::report_json(r);
  CHECK(j.at("accuracy") == 0.8);
  CHECK(j.at("roc_auc_ovr") == 0.9);
  CHECK(j.at("train_time_seconds") == 12.5);
}
