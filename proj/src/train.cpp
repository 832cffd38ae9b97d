#include "spikeseq/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "spikeseq/rng.hpp"

namespace spikeseq::train {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("adam betas must lie in [0,1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("adam epsilon must be positive");
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("softmax of an empty vector");
  double hi = scores[0];
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite score");
    hi = std::max(hi, s);
  }
  std::vector<double> p(scores.size());
  double z = 0.0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    p[c] = std::exp(scores[c] - hi);
    z += p[c];
  }
  for (double& v : p) v /= z;
  return p;
}

std::pair<double, std::vector<double>> softmax_cross_entropy(std::span<const double> scores,
                                                             std::size_t target) {
  if (target >= scores.size()) throw std::invalid_argument("target class out of range");
  std::vector<double> p = softmax(scores);
  const double loss = -std::log(p[target]);
  p[target] -= 1.0;  // p - onehot(target)
  return {loss, std::move(p)};
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t step_t, const TrainConfig& cfg,
                 std::string_view name) {
  if (params.size() != grads.size() || params.size() != m.size() || params.size() != v.size())
    throw std::invalid_argument("adam shapes disagree for " + std::string(name));
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    if (!std::isfinite(g))
      throw std::runtime_error("non-finite gradient in " + std::string(name));
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

void adam_update(snn::SnnModel& model, const snn::Gradients& grads, AdamState& state,
                 const TrainConfig& cfg) {
  if (state.m.size() != model.param_count())
    throw std::invalid_argument("adam state does not match the model");
  ++state.step;
  const std::vector<std::pair<std::string_view, const std::vector<double>*>> grad_blocks = {
      {"layer1.weight", &grads.w1},
      {"layer1.bias", &grads.b1},
      {"layer2.weight", &grads.w2},
      {"layer2.bias", &grads.b2}};
  std::size_t offset = 0;
  auto views = model.params();
  for (std::size_t k = 0; k < views.size(); ++k) {
    auto& block = views[k].values;
    adam_update(block, *grad_blocks[k].second,
                std::span<double>(state.m).subspan(offset, block.size()),
                std::span<double>(state.v).subspan(offset, block.size()), state.step, cfg,
                grad_blocks[k].first);
    offset += block.size();
  }
}

TrainHistory train(snn::SnnModel& model, const encode::EncodedDataset& data,
                   const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("training set is empty");
  if (data.input_dim() != model.input_dim)
    throw std::invalid_argument("encoded input dimension does not match the model");
  if (data.classes.size() != model.classes)
    throw std::invalid_argument("class count does not match the model");

  AdamState state(model.param_count());
  TrainHistory history;
  history.epoch_loss.reserve(cfg.epochs);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(cfg.seed, "train/epoch/" + std::to_string(epoch));
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, order.size());
      auto batch_grads = snn::Gradients::zeros_like(model);
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t idx = order[k];
        auto res = snn::backward(model, data.inputs[idx],
                                 static_cast<std::size_t>(data.targets[idx]));
        if (!std::isfinite(res.loss))
          throw std::runtime_error("training loss became non-finite at epoch " +
                                   std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(begin / cfg.batch_size + 1));
        loss_sum += res.loss;
        batch_grads.add(res.grads);
      }
      batch_grads.scale(1.0 / static_cast<double>(end - begin));
      adam_update(model, batch_grads, state, cfg);
      ++history.updates;
    }
    history.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
  }
  history.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return history;
}

Evaluation evaluate_model(const snn::SnnModel& model, const encode::EncodedDataset& data,
                          double train_time_seconds) {
  if (data.size() == 0) throw std::invalid_argument("evaluation set is empty");

  Matrix scores(data.size(), model.classes);
  std::vector<int> predictions(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto res = snn::forward(model, data.inputs[k]);
    const auto p = softmax(res.scores);
    std::size_t best = 0;
    for (std::size_t c = 0; c < model.classes; ++c) {
      scores(k, c) = p[c];
      if (res.scores[c] > res.scores[best]) best = c;  // ties keep the lowest index
    }
    predictions[k] = static_cast<int>(best);
  }

  Evaluation ev{{}, {}, metrics::confusion(data.targets, predictions, model.classes),
                std::move(predictions), std::move(scores)};
  ev.detail = metrics::summary(ev.cm);
  ev.report.accuracy = ev.detail.accuracy;
  ev.report.precision_weighted = ev.detail.precision_weighted;
  ev.report.recall_weighted = ev.detail.recall_weighted;
  ev.report.f1_weighted = ev.detail.f1_weighted;
  ev.report.f1_macro = ev.detail.f1_macro;
  ev.report.roc_auc_ovr = metrics::roc_auc_ovr(data.targets, ev.scores);
  ev.report.train_time_seconds = train_time_seconds;
  return ev;
}

namespace {

metrics::MetricsReport mean_report(const std::vector<metrics::MetricsReport>& reports) {
  metrics::MetricsReport mean;
  for (const auto& r : reports) {
    mean.accuracy += r.accuracy;
    mean.precision_weighted += r.precision_weighted;
    mean.recall_weighted += r.recall_weighted;
    mean.f1_weighted += r.f1_weighted;
    mean.f1_macro += r.f1_macro;
    mean.roc_auc_ovr += r.roc_auc_ovr;
    mean.train_time_seconds += r.train_time_seconds;
  }
  const auto n = static_cast<double>(reports.size());
  mean.accuracy /= n;
  mean.precision_weighted /= n;
  mean.recall_weighted /= n;
  mean.f1_weighted /= n;
  mean.f1_macro /= n;
  mean.roc_auc_ovr /= n;
  mean.train_time_seconds /= n;
  return mean;
}

}  // namespace

RepeatedEvaluation evaluate_repeated(const seqio::Dataset& ds, const encode::Alphabet& alphabet,
                                     std::size_t l_max, const ModelSpec& spec,
                                     const seqio::SplitPlan& plan, const TrainConfig& cfg,
                                     bool parallel) {
  cfg.validate();
  spec.lif.validate();
  if (l_max == 0) l_max = ds.max_length();

  RepeatedEvaluation out;
  out.per_repeat.resize(plan.repeats);

  auto run_repeat = [&](std::size_t r) {
    auto [train_side, test_side] = seqio::stratified_split(ds, plan, r);
    const auto train_data = encode::encode_dataset(train_side, alphabet, l_max, ds.classes);
    const auto test_data = encode::encode_dataset(test_side, alphabet, l_max, ds.classes);

    const std::string tag = "repeat/" + std::to_string(r);
    Rng init_rng(cfg.seed, tag + "/model-init");
    auto model = snn::SnnModel::init(train_data.input_dim(), spec.hidden, ds.classes.size(),
                                     spec.lif, init_rng);
    TrainConfig repeat_cfg = cfg;
    repeat_cfg.seed = derive_seed(cfg.seed, tag + "/train");
    const auto history = train(model, train_data, repeat_cfg);
    out.per_repeat[r] = evaluate_model(model, test_data, history.wall_seconds).report;
  };

  if (parallel && plan.repeats > 1) {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(plan.repeats);
    for (std::size_t r = 0; r < plan.repeats; ++r)
      workers.emplace_back([&, r] {
        try {
          run_repeat(r);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      });
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t r = 0; r < plan.repeats; ++r) run_repeat(r);
  }

  out.mean = mean_report(out.per_repeat);
  return out;
}

}  // namespace spikeseq::train
