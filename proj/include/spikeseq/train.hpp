#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "spikeseq/encode.hpp"
#include "spikeseq/matrix.hpp"
#include "spikeseq/metrics.hpp"
#include "spikeseq/seqio.hpp"
#include "spikeseq/snn.hpp"

namespace spikeseq::train {

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.001;
  std::size_t batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

// First/second-moment accumulators laid out flat over the model's parameter
// blocks in their fixed order.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t n_params) : m(n_params, 0.0), v(n_params, 0.0) {}
};

struct TrainHistory {
  std::vector<double> epoch_loss;   // mean training loss per epoch
  double wall_seconds = 0.0;        // training loop only
  std::uint64_t updates = 0;
};

// Numerically stable softmax cross-entropy; returns (loss, d loss / d scores).
std::pair<double, std::vector<double>> softmax_cross_entropy(std::span<const double> scores,
                                                             std::size_t target);

std::vector<double> softmax(std::span<const double> scores);

// One bias-corrected update over a flat parameter slice; `step_t` is the
// 1-based step count and `name` qualifies diagnostics.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t step_t, const TrainConfig& cfg,
                 std::string_view name);

// Applies one update across all model parameters, advancing state.step.
void adam_update(snn::SnnModel& model, const snn::Gradients& grads, AdamState& state,
                 const TrainConfig& cfg);

// Mini-batch training: per-epoch seed-derived shuffles, fixed-order gradient
// accumulation within a batch, one adam step per batch. Deterministic given
// (seed, data, config).
TrainHistory train(snn::SnnModel& model, const encode::EncodedDataset& data,
                   const TrainConfig& cfg);

struct Evaluation {
  metrics::MetricsReport report;
  metrics::Summary detail;
  metrics::ConfusionMatrix cm;
  std::vector<int> predictions;
  Matrix scores;  // softmax of the per-record class scores
};

Evaluation evaluate_model(const snn::SnnModel& model, const encode::EncodedDataset& data,
                          double train_time_seconds = 0.0);

struct RepeatedEvaluation {
  std::vector<metrics::MetricsReport> per_repeat;
  metrics::MetricsReport mean;
};

// Hyperparameters needed to build a fresh model per repeat.
struct ModelSpec {
  snn::LifConfig lif;
  std::size_t hidden = 128;
};

// For each repeat: stratified split, fresh model, train, score the test side.
// The mean report is the field-wise arithmetic mean. Repeats are independent;
// with parallel=true they run on worker threads (wall-clock fields then
// reflect contended timing, everything else is unchanged).
RepeatedEvaluation evaluate_repeated(const seqio::Dataset& ds, const encode::Alphabet& alphabet,
                                     std::size_t l_max, const ModelSpec& spec,
                                     const seqio::SplitPlan& plan, const TrainConfig& cfg,
                                     bool parallel = false);

}  // namespace spikeseq::train
