#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spikeseq/encode.hpp"
#include "spikeseq/matrix.hpp"
#include "spikeseq/rng.hpp"

namespace spikeseq {
class Rng;
}

namespace spikeseq::snn {

enum class ResetMode {
  subtract,  // u -= threshold on fire; residual super-threshold charge is kept
  to_zero,   // u = 0 on fire
};

enum class Readout {
  spike_rate,     // class score = time-averaged output spikes
  membrane_mean,  // class score = time-averaged pre-reset potential
};

// Hard is the spiking network: binary spikes forward, triangular surrogate
// derivative backward. Smooth replaces the spike with the ramp
// clamp((u - threshold)/surrogate_width + 0.5, 0, 1) and runs every time step
// from a fresh membrane, so the unrolled network is exactly the composition
// the backward pass differentiates; it exists for finite-difference
// verification of the gradients.
enum class SpikeMode { hard, smooth };

struct LifConfig {
  double decay_multiplier = 0.9;
  double threshold = 1.0;
  std::size_t time_steps = 10;
  double surrogate_width = 1.0;
  ResetMode reset = ResetMode::subtract;
  Readout readout = Readout::spike_rate;

  void validate() const;
};

// Per-layer neuron state between steps.
struct LifState {
  std::vector<double> potential;
  std::vector<double> last_spikes;

  explicit LifState(std::size_t neurons)
      : potential(neurons, 0.0), last_spikes(neurons, 0.0) {}
  std::size_t size() const { return potential.size(); }
};

// One synchronous step: u' = decay * u + current, spike where u' > threshold,
// then reset. Returns the spike vector and leaves the post-reset potential in
// the state.
std::vector<double> lif_step(LifState& state, std::span<const double> current,
                             const LifConfig& cfg);

// Two linear layers of LIF neurons over a flattened one-hot input, presented
// as constant current at every time step.
struct SnnModel {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::size_t classes = 0;
  LifConfig lif;
  std::vector<double> w1;  // input_dim x hidden, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden x classes, row-major
  std::vector<double> b2;  // classes

  // Weights uniform in +-(1/fan_in)^(1/2), biases zero.
  static SnnModel init(std::size_t input_dim, std::size_t hidden, std::size_t classes,
                       const LifConfig& lif, Rng& rng);

  struct ParamView {
    std::string_view name;
    std::span<double> values;
  };
  std::vector<ParamView> params();
  std::size_t param_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  // b1 + W1^T x for a one-hot input; identical at every time step.
  std::vector<double> layer1_current(const encode::OneHotTensor& input) const;
  std::vector<double> layer2_current(std::span<const double> hidden_spikes) const;
  void validate_input(const encode::OneHotTensor& input) const;
};

struct Gradients {
  std::vector<double> w1, b1, w2, b2;

  static Gradients zeros_like(const SnnModel& model);
  void add(const Gradients& other);
  void scale(double factor);
};

struct SpikeTrace {
  Matrix hidden_spikes;  // time_steps x hidden
  Matrix output_spikes;  // time_steps x classes
};

struct ForwardResult {
  std::vector<double> scores;  // length C; spike-rate readout lies in [0,1]
  std::optional<SpikeTrace> trace;
};

ForwardResult forward(const SnnModel& model, const encode::OneHotTensor& input,
                      bool record = false, SpikeMode mode = SpikeMode::hard);

// Softmax cross-entropy gradients through the unrolled steps. The spike uses
// the triangular surrogate max(0, 1 - |u - threshold|/surrogate_width); the
// membrane carry-over and the reset are gradient-blocked, so gradient flows
// only along current -> potential -> spike within each step.
struct BackwardResult {
  double loss = 0.0;
  std::vector<double> scores;
  Gradients grads;
};

BackwardResult backward(const SnnModel& model, const encode::OneHotTensor& input,
                        std::size_t target, SpikeMode mode = SpikeMode::hard);

// Model plus the encoding context needed to score new sequences. The binary
// layout is versioned and round-trips bit-exactly.
struct Checkpoint {
  SnnModel model;
  std::string alphabet_symbols;
  std::optional<char> alphabet_catch_all;
  std::size_t l_max = 0;
  std::vector<std::string> class_names;

  encode::Alphabet alphabet() const { return {alphabet_symbols, alphabet_catch_all}; }
};

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out);
Checkpoint load_checkpoint(std::istream& in);
void save_checkpoint_file(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace spikeseq::snn
