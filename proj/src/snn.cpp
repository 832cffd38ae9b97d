#include "spikeseq/snn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "spikeseq/train.hpp"

namespace spikeseq::snn {

namespace {

// Single source of the step rule; lif_step, forward and backward all go
// through here. pre_potential (post-integration, pre-reset) is recorded when
// a buffer is supplied.
void lif_advance(std::span<double> u, std::span<const double> current, const LifConfig& cfg,
                 std::span<double> spikes, std::span<double> pre_potential) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(current[i]))
      throw std::invalid_argument("non-finite input current at neuron " + std::to_string(i));
    double v = cfg.decay_multiplier * u[i] + current[i];
    if (!pre_potential.empty()) pre_potential[i] = v;
    const double s = v > cfg.threshold ? 1.0 : 0.0;
    if (s != 0.0) v = cfg.reset == ResetMode::subtract ? v - cfg.threshold : 0.0;
    u[i] = v;
    spikes[i] = s;
  }
}

double ramp_spike(double pre, const LifConfig& cfg) {
  return std::clamp((pre - cfg.threshold) / cfg.surrogate_width + 0.5, 0.0, 1.0);
}

// Derivative of the spike w.r.t. the pre-reset potential.
double spike_derivative(double pre, const LifConfig& cfg, SpikeMode mode) {
  if (mode == SpikeMode::hard)
    return std::max(0.0, 1.0 - std::abs(pre - cfg.threshold) / cfg.surrogate_width);
  const double z = (pre - cfg.threshold) / cfg.surrogate_width + 0.5;
  return (z > 0.0 && z < 1.0) ? 1.0 / cfg.surrogate_width : 0.0;
}

struct Unrolled {
  Matrix pre1, spikes1, pre2, spikes2;  // all time_steps x layer width
};

// Runs the network for all time steps, keeping the per-step traces the
// backward pass needs.
Unrolled unroll(const SnnModel& model, const std::vector<double>& current1, SpikeMode mode) {
  const std::size_t steps = model.lif.time_steps;
  Unrolled r{Matrix(steps, model.hidden), Matrix(steps, model.hidden),
             Matrix(steps, model.classes), Matrix(steps, model.classes)};

  if (mode == SpikeMode::hard) {
    std::vector<double> u1(model.hidden, 0.0), u2(model.classes, 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
      std::span<double> sp1(&r.spikes1(t, 0), model.hidden);
      std::span<double> pr1(&r.pre1(t, 0), model.hidden);
      lif_advance(u1, current1, model.lif, sp1, pr1);
      const auto current2 = model.layer2_current(sp1);
      lif_advance(u2, current2, model.lif, std::span<double>(&r.spikes2(t, 0), model.classes),
                  std::span<double>(&r.pre2(t, 0), model.classes));
    }
  } else {
    // Smooth verification mode: fresh membrane every step, graded ramp
    // spikes. All cross-step paths are absent by construction.
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t h = 0; h < model.hidden; ++h) {
        r.pre1(t, h) = current1[h];
        r.spikes1(t, h) = ramp_spike(current1[h], model.lif);
      }
      const auto current2 =
          model.layer2_current(std::span<const double>(&r.spikes1(t, 0), model.hidden));
      for (std::size_t c = 0; c < model.classes; ++c) {
        r.pre2(t, c) = current2[c];
        r.spikes2(t, c) = ramp_spike(current2[c], model.lif);
      }
    }
  }
  return r;
}

std::vector<double> readout_scores(const SnnModel& model, const Unrolled& r) {
  const std::size_t steps = model.lif.time_steps;
  const Matrix& src = model.lif.readout == Readout::spike_rate ? r.spikes2 : r.pre2;
  std::vector<double> scores(model.classes, 0.0);
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t c = 0; c < model.classes; ++c) scores[c] += src(t, c);
  for (double& s : scores) s /= static_cast<double>(steps);
  return scores;
}

}  // namespace

void LifConfig::validate() const {
  if (!(decay_multiplier > 0.0 && decay_multiplier < 1.0))
    throw std::invalid_argument("decay_multiplier must lie in (0,1)");
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
  if (time_steps < 1) throw std::invalid_argument("time_steps must be >= 1");
  if (!(surrogate_width > 0.0))
    throw std::invalid_argument("surrogate_width must be positive");
}

std::vector<double> lif_step(LifState& state, std::span<const double> current,
                             const LifConfig& cfg) {
  if (current.size() != state.size())
    throw std::invalid_argument("current dimension " + std::to_string(current.size()) +
                                " does not match state dimension " +
                                std::to_string(state.size()));
  std::vector<double> spikes(state.size(), 0.0);
  lif_advance(state.potential, current, cfg, spikes, {});
  state.last_spikes = spikes;
  return spikes;
}

SnnModel SnnModel::init(std::size_t input_dim, std::size_t hidden, std::size_t classes,
                        const LifConfig& lif, Rng& rng) {
  if (input_dim == 0 || hidden == 0 || classes == 0)
    throw std::invalid_argument("model dimensions must be positive");
  lif.validate();
  SnnModel m;
  m.input_dim = input_dim;
  m.hidden = hidden;
  m.classes = classes;
  m.lif = lif;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  m.w1.resize(input_dim * hidden);
  for (double& w : m.w1) w = rng.uniform(-s1, s1);
  m.b1.assign(hidden, 0.0);
  m.w2.resize(hidden * classes);
  for (double& w : m.w2) w = rng.uniform(-s2, s2);
  m.b2.assign(classes, 0.0);
  return m;
}

std::vector<SnnModel::ParamView> SnnModel::params() {
  return {{"layer1.weight", w1}, {"layer1.bias", b1}, {"layer2.weight", w2},
          {"layer2.bias", b2}};
}

void SnnModel::validate_input(const encode::OneHotTensor& input) const {
  if (input.rows * input.cols != input_dim)
    throw std::invalid_argument("input is " + std::to_string(input.rows) + "x" +
                                std::to_string(input.cols) + " but the model expects " +
                                std::to_string(input_dim) + " flattened features");
  if (input.true_length > input.rows || input.codes.size() != input.true_length)
    throw std::invalid_argument("malformed one-hot input");
  for (int c : input.codes)
    if (c < 0 || static_cast<std::size_t>(c) >= input.cols)
      throw std::invalid_argument("one-hot code out of range");
}

std::vector<double> SnnModel::layer1_current(const encode::OneHotTensor& input) const {
  validate_input(input);
  std::vector<double> current(b1);
  for (std::size_t i = 0; i < input.true_length; ++i) {
    const double* row = &w1[(i * input.cols + static_cast<std::size_t>(input.codes[i])) * hidden];
    for (std::size_t h = 0; h < hidden; ++h) current[h] += row[h];
  }
  return current;
}

std::vector<double> SnnModel::layer2_current(std::span<const double> hidden_spikes) const {
  std::vector<double> current(b2);
  for (std::size_t h = 0; h < hidden; ++h) {
    const double s = hidden_spikes[h];
    if (s == 0.0) continue;
    const double* row = &w2[h * classes];
    if (s == 1.0) {
      for (std::size_t c = 0; c < classes; ++c) current[c] += row[c];
    } else {
      for (std::size_t c = 0; c < classes; ++c) current[c] += s * row[c];
    }
  }
  return current;
}

Gradients Gradients::zeros_like(const SnnModel& model) {
  Gradients g;
  g.w1.assign(model.w1.size(), 0.0);
  g.b1.assign(model.b1.size(), 0.0);
  g.w2.assign(model.w2.size(), 0.0);
  g.b2.assign(model.b2.size(), 0.0);
  return g;
}

void Gradients::add(const Gradients& other) {
  auto axpy = [](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  };
  axpy(w1, other.w1);
  axpy(b1, other.b1);
  axpy(w2, other.w2);
  axpy(b2, other.b2);
}

void Gradients::scale(double factor) {
  for (auto* v : {&w1, &b1, &w2, &b2})
    for (double& x : *v) x *= factor;
}

ForwardResult forward(const SnnModel& model, const encode::OneHotTensor& input, bool record,
                      SpikeMode mode) {
  const auto current1 = model.layer1_current(input);
  const auto r = unroll(model, current1, mode);
  ForwardResult res;
  res.scores = readout_scores(model, r);
  if (record) res.trace = SpikeTrace{r.spikes1, r.spikes2};
  return res;
}

BackwardResult backward(const SnnModel& model, const encode::OneHotTensor& input,
                        std::size_t target, SpikeMode mode) {
  if (target >= model.classes)
    throw std::invalid_argument("target class out of range");
  const auto current1 = model.layer1_current(input);
  const auto r = unroll(model, current1, mode);
  const std::size_t steps = model.lif.time_steps;

  BackwardResult out;
  out.scores = readout_scores(model, r);
  auto [loss, gscores] = train::softmax_cross_entropy(out.scores, target);
  out.loss = loss;
  out.grads = Gradients::zeros_like(model);
  Gradients& g = out.grads;

  const double inv_steps = 1.0 / static_cast<double>(steps);
  std::vector<double> delta2(model.classes);
  std::vector<double> delta1_sum(model.hidden, 0.0);

  for (std::size_t t = 0; t < steps; ++t) {
    // Output layer: each step contributes 1/T to its class score; spike-rate
    // readout additionally passes through the spike derivative.
    for (std::size_t c = 0; c < model.classes; ++c) {
      double d = gscores[c] * inv_steps;
      if (model.lif.readout == Readout::spike_rate)
        d *= spike_derivative(r.pre2(t, c), model.lif, mode);
      delta2[c] = d;
      g.b2[c] += d;
    }
    for (std::size_t h = 0; h < model.hidden; ++h) {
      const double s = r.spikes1(t, h);
      if (s == 0.0) continue;
      double* grow = &g.w2[h * model.classes];
      for (std::size_t c = 0; c < model.classes; ++c) grow[c] += s * delta2[c];
    }
    // Hidden layer, through the same-step spikes only.
    for (std::size_t h = 0; h < model.hidden; ++h) {
      const double* wrow = &model.w2[h * model.classes];
      double ds = 0.0;
      for (std::size_t c = 0; c < model.classes; ++c) ds += wrow[c] * delta2[c];
      const double d1 = ds * spike_derivative(r.pre1(t, h), model.lif, mode);
      g.b1[h] += d1;
      delta1_sum[h] += d1;
    }
  }

  // The layer-1 current is the same at every step, so the input-weight
  // gradient is the summed delta placed at the active one-hot features.
  for (std::size_t i = 0; i < input.true_length; ++i) {
    double* grow =
        &g.w1[(i * input.cols + static_cast<std::size_t>(input.codes[i])) * model.hidden];
    for (std::size_t h = 0; h < model.hidden; ++h) grow[h] += delta1_sum[h];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoint container, format version 1 (little-endian):
//   magic "SPIKESEQ", u32 version,
//   alphabet (u32 length + bytes, u8 has_catch_all, u8 catch_all),
//   u64 l_max, u64 input_dim, u64 hidden, u64 classes,
//   lif (f64 decay, f64 threshold, u64 time_steps, f64 surrogate_width,
//        u8 reset, u8 readout),
//   class names (u32 count, each u32 length + bytes),
//   parameters as raw f64: w1, b1, w2, b2 (row-major).
// ---------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

constexpr char kMagic[8] = {'S', 'P', 'I', 'K', 'E', 'S', 'E', 'Q'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (!in) throw std::runtime_error("truncated checkpoint");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

void put_string(std::ostream& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error("truncated checkpoint");
  return s;
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_doubles(std::istream& in, std::vector<double>& v, std::size_t n) {
  v.resize(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("truncated checkpoint");
  for (double d : v)
    if (!std::isfinite(d)) throw std::runtime_error("checkpoint holds non-finite parameters");
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put_string(out, ckpt.alphabet_symbols);
  put<std::uint8_t>(out, ckpt.alphabet_catch_all ? 1 : 0);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(ckpt.alphabet_catch_all.value_or('\0')));
  put<std::uint64_t>(out, ckpt.l_max);
  put<std::uint64_t>(out, ckpt.model.input_dim);
  put<std::uint64_t>(out, ckpt.model.hidden);
  put<std::uint64_t>(out, ckpt.model.classes);
  put<double>(out, ckpt.model.lif.decay_multiplier);
  put<double>(out, ckpt.model.lif.threshold);
  put<std::uint64_t>(out, ckpt.model.lif.time_steps);
  put<double>(out, ckpt.model.lif.surrogate_width);
  put<std::uint8_t>(out, ckpt.model.lif.reset == ResetMode::to_zero ? 1 : 0);
  put<std::uint8_t>(out, ckpt.model.lif.readout == Readout::membrane_mean ? 1 : 0);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.class_names.size()));
  for (const auto& name : ckpt.class_names) put_string(out, name);
  put_doubles(out, ckpt.model.w1);
  put_doubles(out, ckpt.model.b1);
  put_doubles(out, ckpt.model.w2);
  put_doubles(out, ckpt.model.b2);
  if (!out) throw std::runtime_error("checkpoint write failed");
}

Checkpoint load_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("not a model checkpoint (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  ckpt.alphabet_symbols = get_string(in);
  const bool has_catch_all = get<std::uint8_t>(in) != 0;
  const char catch_all = static_cast<char>(get<std::uint8_t>(in));
  if (has_catch_all) ckpt.alphabet_catch_all = catch_all;
  ckpt.l_max = get<std::uint64_t>(in);
  ckpt.model.input_dim = get<std::uint64_t>(in);
  ckpt.model.hidden = get<std::uint64_t>(in);
  ckpt.model.classes = get<std::uint64_t>(in);
  ckpt.model.lif.decay_multiplier = get<double>(in);
  ckpt.model.lif.threshold = get<double>(in);
  ckpt.model.lif.time_steps = get<std::uint64_t>(in);
  ckpt.model.lif.surrogate_width = get<double>(in);
  ckpt.model.lif.reset = get<std::uint8_t>(in) != 0 ? ResetMode::to_zero : ResetMode::subtract;
  ckpt.model.lif.readout =
      get<std::uint8_t>(in) != 0 ? Readout::membrane_mean : Readout::spike_rate;
  ckpt.model.lif.validate();

  const auto n_classes = get<std::uint32_t>(in);
  if (n_classes != ckpt.model.classes)
    throw std::runtime_error("checkpoint class-name count does not match model");
  ckpt.class_names.reserve(n_classes);
  for (std::uint32_t i = 0; i < n_classes; ++i) ckpt.class_names.push_back(get_string(in));

  if (ckpt.model.input_dim != ckpt.l_max * ckpt.alphabet_symbols.size())
    throw std::runtime_error("checkpoint input dimension does not match L_max * |alphabet|");

  get_doubles(in, ckpt.model.w1, ckpt.model.input_dim * ckpt.model.hidden);
  get_doubles(in, ckpt.model.b1, ckpt.model.hidden);
  get_doubles(in, ckpt.model.w2, ckpt.model.hidden * ckpt.model.classes);
  get_doubles(in, ckpt.model.b2, ckpt.model.classes);
  return ckpt;
}

void save_checkpoint_file(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  save_checkpoint(ckpt, out);
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return load_checkpoint(in);
}

}  // namespace spikeseq::snn
