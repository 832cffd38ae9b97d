#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spikeseq/encode.hpp"
#include "spikeseq/seqio.hpp"
#include "spikeseq/snn.hpp"
#include "spikeseq/train.hpp"
#include "spikeseq/transforms.hpp"

namespace spikeseq::cli {

// Fully-resolved run configuration. Every field carries the module default;
// a config file (`section.key = value` lines) and then command-line flags
// override it. All randomness in a run flows from `seed` via tagged
// derivation.
struct RunConfig {
  std::uint64_t seed = 0;        // run.seed
  std::string out_dir = "out";   // run.out
  bool parallel = false;         // run.parallel

  // data source: FASTA path or synthetic-generator parameters, exactly one
  std::string fasta;                      // data.fasta
  std::string labels_csv;                 // data.labels
  std::size_t syn_classes = 0;            // data.synthetic.classes
  std::vector<std::size_t> syn_per_class; // data.synthetic.per_class
  std::size_t syn_length = 0;             // data.synthetic.length
  double syn_mutation_rate = 0.0;         // data.synthetic.mutation_rate

  std::string alphabet_symbols = "ACDEFGHIKLMNPQRSTVWYX";  // encode.alphabet
  std::string catch_all = "X";                             // encode.catch_all ("none" = strict)
  std::size_t l_max = 0;                                   // encode.l_max (0 = dataset max)

  std::size_t hidden = 128;  // snn.hidden
  snn::LifConfig lif;        // snn.decay_multiplier/.threshold/.time_steps/.surrogate_width
                             // snn.reset (subtract|zero), snn.readout (rate|membrane)

  train::TrainConfig tcfg;   // train.epochs/.learning_rate/.batch_size
  seqio::SplitPlan plan;     // split.train_fraction/.repeats

  transforms::TransformKind kind = transforms::TransformKind::rp;  // transform.kind
  std::size_t embed_m = 1;        // transform.m
  std::size_t embed_tau = 1;      // transform.tau
  double gaf_min = -1.0;          // transform.gaf_min
  double gaf_max = 1.0;           // transform.gaf_max
  std::size_t mtf_bins = 8;       // transform.bins
  bool slice_padding = false;     // transform.slice_padding
  bool image = false;             // transform.image

  std::string checkpoint;  // eval.checkpoint

  bool has_synthetic_source() const { return syn_classes > 0; }
  encode::Alphabet alphabet() const;
  std::vector<std::size_t> per_class_counts() const;  // broadcasts a single count
};

// Applies one `key = value` assignment; throws on unknown keys or bad values.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Line-oriented `key = value` file; '#' lines and blank lines are skipped.
void load_config(RunConfig& cfg, std::istream& in);
void load_config_file(RunConfig& cfg, const std::string& path);

// The manifest is itself a loadable config file with every field resolved.
void write_manifest(const RunConfig& cfg, const std::string& command, std::ostream& out);

// Entry point behind the `spikeseq` binary; args excludes the program name.
// Returns 0 iff all requested artifacts were written.
int run_command(const std::vector<std::string>& args);

}  // namespace spikeseq::cli
