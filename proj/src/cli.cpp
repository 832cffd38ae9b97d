#include "spikeseq/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "spikeseq/metrics.hpp"
#include "spikeseq/rng.hpp"

namespace spikeseq::cli {

namespace fs = std::filesystem;

namespace {

// ----- value parsing ---------------------------------------------------

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::runtime_error("bad value for " + key + ": \"" + value + "\"");
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

double to_f64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<std::size_t>(to_u64(key, trim(item))));
  if (out.empty()) bad_value(key, value);
  return out;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string kind_name(transforms::TransformKind k) {
  switch (k) {
    case transforms::TransformKind::rp: return "rp";
    case transforms::TransformKind::gaf: return "gaf";
    case transforms::TransformKind::mtf: return "mtf";
  }
  return "rp";
}

}  // namespace

encode::Alphabet RunConfig::alphabet() const {
  std::optional<char> ca;
  if (catch_all != "none") {
    if (catch_all.size() != 1)
      throw std::runtime_error("encode.catch_all must be a single character or \"none\"");
    ca = catch_all[0];
  }
  return encode::Alphabet(alphabet_symbols, ca);
}

std::vector<std::size_t> RunConfig::per_class_counts() const {
  if (syn_per_class.empty())
    throw std::runtime_error("data.synthetic.per_class is required for a synthetic source");
  if (syn_per_class.size() == 1 && syn_classes > 1)
    return std::vector<std::size_t>(syn_classes, syn_per_class[0]);
  return syn_per_class;
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "run.seed") cfg.seed = to_u64(key, value);
  else if (key == "run.out") cfg.out_dir = value;
  else if (key == "run.parallel") cfg.parallel = to_bool(key, value);
  else if (key == "run.command") {}  // informational in manifests
  else if (key == "data.fasta") cfg.fasta = value;
  else if (key == "data.labels") cfg.labels_csv = value;
  else if (key == "data.synthetic.classes") cfg.syn_classes = to_u64(key, value);
  else if (key == "data.synthetic.per_class") cfg.syn_per_class = to_size_list(key, value);
  else if (key == "data.synthetic.length") cfg.syn_length = to_u64(key, value);
  else if (key == "data.synthetic.mutation_rate") cfg.syn_mutation_rate = to_f64(key, value);
  else if (key == "encode.alphabet") cfg.alphabet_symbols = value;
  else if (key == "encode.catch_all") cfg.catch_all = value;
  else if (key == "encode.l_max") cfg.l_max = to_u64(key, value);
  else if (key == "snn.hidden") cfg.hidden = to_u64(key, value);
  else if (key == "snn.decay_multiplier") cfg.lif.decay_multiplier = to_f64(key, value);
  else if (key == "snn.threshold") cfg.lif.threshold = to_f64(key, value);
  else if (key == "snn.time_steps") cfg.lif.time_steps = to_u64(key, value);
  else if (key == "snn.surrogate_width") cfg.lif.surrogate_width = to_f64(key, value);
  else if (key == "snn.reset") {
    if (value == "subtract") cfg.lif.reset = snn::ResetMode::subtract;
    else if (value == "zero") cfg.lif.reset = snn::ResetMode::to_zero;
    else bad_value(key, value);
  } else if (key == "snn.readout") {
    if (value == "rate") cfg.lif.readout = snn::Readout::spike_rate;
    else if (value == "membrane") cfg.lif.readout = snn::Readout::membrane_mean;
    else bad_value(key, value);
  } else if (key == "train.epochs") cfg.tcfg.epochs = to_u64(key, value);
  else if (key == "train.learning_rate") cfg.tcfg.learning_rate = to_f64(key, value);
  else if (key == "train.batch_size") cfg.tcfg.batch_size = to_u64(key, value);
  else if (key == "split.train_fraction") cfg.plan.train_fraction = to_f64(key, value);
  else if (key == "split.repeats") cfg.plan.repeats = to_u64(key, value);
  else if (key == "transform.kind") {
    if (value == "rp") cfg.kind = transforms::TransformKind::rp;
    else if (value == "gaf") cfg.kind = transforms::TransformKind::gaf;
    else if (value == "mtf") cfg.kind = transforms::TransformKind::mtf;
    else bad_value(key, value);
  } else if (key == "transform.m") cfg.embed_m = to_u64(key, value);
  else if (key == "transform.tau") cfg.embed_tau = to_u64(key, value);
  else if (key == "transform.gaf_min") cfg.gaf_min = to_f64(key, value);
  else if (key == "transform.gaf_max") cfg.gaf_max = to_f64(key, value);
  else if (key == "transform.bins") cfg.mtf_bins = to_u64(key, value);
  else if (key == "transform.slice_padding") cfg.slice_padding = to_bool(key, value);
  else if (key == "transform.image") cfg.image = to_bool(key, value);
  else if (key == "eval.checkpoint") cfg.checkpoint = value;
  else throw std::runtime_error("unknown config key: " + key);
}

void load_config(RunConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + " has no '='");
    apply_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  load_config(cfg, in);
}

void write_manifest(const RunConfig& cfg, const std::string& command, std::ostream& out) {
  out << "run.command = " << command << '\n';
  out << "run.seed = " << cfg.seed << '\n';
  out << "run.out = " << cfg.out_dir << '\n';
  out << "run.parallel = " << (cfg.parallel ? "true" : "false") << '\n';
  if (!cfg.fasta.empty()) {
    out << "data.fasta = " << cfg.fasta << '\n';
    if (!cfg.labels_csv.empty()) out << "data.labels = " << cfg.labels_csv << '\n';
  } else if (cfg.has_synthetic_source()) {
    out << "data.synthetic.classes = " << cfg.syn_classes << '\n';
    out << "data.synthetic.per_class = ";
    const auto counts = cfg.per_class_counts();
    for (std::size_t i = 0; i < counts.size(); ++i) out << (i ? "," : "") << counts[i];
    out << '\n';
    out << "data.synthetic.length = " << cfg.syn_length << '\n';
    out << "data.synthetic.mutation_rate = " << fmt_double(cfg.syn_mutation_rate) << '\n';
  }
  out << "encode.alphabet = " << cfg.alphabet_symbols << '\n';
  out << "encode.catch_all = " << cfg.catch_all << '\n';
  out << "encode.l_max = " << cfg.l_max << '\n';
  out << "snn.hidden = " << cfg.hidden << '\n';
  out << "snn.decay_multiplier = " << fmt_double(cfg.lif.decay_multiplier) << '\n';
  out << "snn.threshold = " << fmt_double(cfg.lif.threshold) << '\n';
  out << "snn.time_steps = " << cfg.lif.time_steps << '\n';
  out << "snn.surrogate_width = " << fmt_double(cfg.lif.surrogate_width) << '\n';
  out << "snn.reset = " << (cfg.lif.reset == snn::ResetMode::subtract ? "subtract" : "zero")
      << '\n';
  out << "snn.readout = "
      << (cfg.lif.readout == snn::Readout::spike_rate ? "rate" : "membrane") << '\n';
  out << "train.epochs = " << cfg.tcfg.epochs << '\n';
  out << "train.learning_rate = " << fmt_double(cfg.tcfg.learning_rate) << '\n';
  out << "train.batch_size = " << cfg.tcfg.batch_size << '\n';
  out << "split.train_fraction = " << fmt_double(cfg.plan.train_fraction) << '\n';
  out << "split.repeats = " << cfg.plan.repeats << '\n';
  out << "transform.kind = " << kind_name(cfg.kind) << '\n';
  out << "transform.m = " << cfg.embed_m << '\n';
  out << "transform.tau = " << cfg.embed_tau << '\n';
  out << "transform.gaf_min = " << fmt_double(cfg.gaf_min) << '\n';
  out << "transform.gaf_max = " << fmt_double(cfg.gaf_max) << '\n';
  out << "transform.bins = " << cfg.mtf_bins << '\n';
  out << "transform.slice_padding = " << (cfg.slice_padding ? "true" : "false") << '\n';
  out << "transform.image = " << (cfg.image ? "true" : "false") << '\n';
  if (!cfg.checkpoint.empty()) out << "eval.checkpoint = " << cfg.checkpoint << '\n';
}

namespace {

// ----- shared command plumbing ------------------------------------------

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void emit_manifest(const RunConfig& cfg, const std::string& command) {
  auto out = open_out(fs::path(cfg.out_dir) / "run_manifest.txt");
  write_manifest(cfg, command, out);
}

seqio::Dataset load_dataset(const RunConfig& cfg) {
  const bool has_fasta = !cfg.fasta.empty();
  if (has_fasta == cfg.has_synthetic_source())
    throw std::runtime_error(
        "configure exactly one data source: data.fasta or data.synthetic.*");
  if (has_fasta) {
    if (!fs::exists(cfg.fasta))
      throw std::runtime_error("FASTA path does not exist: " + cfg.fasta);
    if (!cfg.labels_csv.empty() && !fs::exists(cfg.labels_csv))
      throw std::runtime_error("label CSV path does not exist: " + cfg.labels_csv);
    return seqio::parse_fasta_file(cfg.fasta, cfg.labels_csv);
  }
  return seqio::generate_synthetic(cfg.syn_classes, cfg.per_class_counts(), cfg.syn_length,
                                   cfg.syn_mutation_rate, cfg.seed);
}

std::size_t resolve_l_max(const RunConfig& cfg, const seqio::Dataset& ds) {
  const std::size_t l = cfg.l_max ? cfg.l_max : ds.max_length();
  if (l == 0) throw std::runtime_error("dataset is empty and encode.l_max is unset");
  return l;
}

std::string sanitize(const std::string& id, std::set<std::string>& used) {
  std::string s = id;
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-')
      c = '_';
  std::string candidate = s;
  for (int k = 2; !used.insert(candidate).second; ++k)
    candidate = s + "." + std::to_string(k);
  return candidate;
}

void write_json(const nlohmann::ordered_json& j, const fs::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

// Shared by the train and crossval commands so a single `train` run is
// exactly crossval's repeat 0.
struct RepeatSeeds {
  std::uint64_t model_init;
  std::uint64_t train;
};

RepeatSeeds repeat_seeds(std::uint64_t run_seed, std::size_t repeat) {
  const std::string tag = "repeat/" + std::to_string(repeat);
  return {derive_seed(run_seed, tag + "/model-init"), derive_seed(run_seed, tag + "/train")};
}

// ----- commands ----------------------------------------------------------

void cmd_datagen(const RunConfig& cfg) {
  if (!cfg.has_synthetic_source() || !cfg.fasta.empty())
    throw std::runtime_error("datagen needs a synthetic data source (data.synthetic.*)");
  const auto ds = load_dataset(cfg);
  fs::create_directories(cfg.out_dir);
  {
    auto out = open_out(fs::path(cfg.out_dir) / "synthetic.fasta");
    seqio::write_fasta(ds, out);
  }
  {
    auto out = open_out(fs::path(cfg.out_dir) / "labels.csv");
    seqio::write_label_csv(ds, out);
  }
  emit_manifest(cfg, "datagen");
}

void cmd_encode(const RunConfig& cfg) {
  const auto ds = load_dataset(cfg);
  const auto alphabet = cfg.alphabet();
  const std::size_t l_max = resolve_l_max(cfg, ds);
  fs::create_directories(fs::path(cfg.out_dir) / "ohe");

  auto signals = open_out(fs::path(cfg.out_dir) / "signals.csv");
  std::set<std::string> used;
  for (const auto& rec : ds.records) {
    const auto sig = encode::signal_encode(rec.residues, alphabet, l_max);
    signals << rec.id;
    for (int v : sig.values) signals << ',' << v;
    signals << '\n';

    const auto ohe = encode::one_hot_encode(rec.residues, alphabet, l_max);
    auto out = open_out(fs::path(cfg.out_dir) / "ohe" / (sanitize(rec.id, used) + ".csv"));
    for (std::size_t i = 0; i < ohe.rows; ++i) {
      for (std::size_t j = 0; j < ohe.cols; ++j)
        out << (j ? "," : "") << static_cast<int>(ohe.entry(i, j));
      out << '\n';
    }
  }
  emit_manifest(cfg, "encode");
}

void cmd_transform(const RunConfig& cfg) {
  const auto ds = load_dataset(cfg);
  const auto alphabet = cfg.alphabet();
  const std::size_t l_max = resolve_l_max(cfg, ds);
  const std::string kind = kind_name(cfg.kind);
  fs::create_directories(fs::path(cfg.out_dir) / kind);

  std::set<std::string> used;
  for (const auto& rec : ds.records) {
    const auto series = transforms::to_series(
        encode::signal_encode(rec.residues, alphabet, l_max), cfg.slice_padding);
    Matrix matrix;
    switch (cfg.kind) {
      case transforms::TransformKind::rp:
        matrix = transforms::recurrence_plot(series, cfg.embed_m, cfg.embed_tau).values;
        break;
      case transforms::TransformKind::gaf:
        matrix = transforms::gramian_angular_field(series, cfg.gaf_min, cfg.gaf_max).values;
        break;
      case transforms::TransformKind::mtf:
        matrix = transforms::markov_transition_field(series, cfg.mtf_bins).second.values;
        break;
    }
    const std::string stem = sanitize(rec.id, used);
    {
      auto out = open_out(fs::path(cfg.out_dir) / kind / (stem + ".csv"));
      transforms::write_matrix_csv(matrix, out);
    }
    if (cfg.image) {
      auto out = open_out(fs::path(cfg.out_dir) / kind / (stem + ".pgm"));
      transforms::write_matrix_pgm(matrix, out);
    }
  }
  emit_manifest(cfg, "transform");
}

void write_history_csv(const train::TrainHistory& history, const fs::path& path) {
  auto out = open_out(path);
  out << "epoch,mean_loss\n";
  for (std::size_t e = 0; e < history.epoch_loss.size(); ++e)
    out << (e + 1) << ',' << fmt_double(history.epoch_loss[e]) << '\n';
  out << "# total_seconds," << fmt_double(history.wall_seconds) << '\n';
}

void cmd_train(const RunConfig& cfg) {
  const auto ds = load_dataset(cfg);
  const auto alphabet = cfg.alphabet();
  const std::size_t l_max = resolve_l_max(cfg, ds);

  seqio::SplitPlan plan = cfg.plan;
  plan.seed = cfg.seed;
  const auto [train_side, test_side] = seqio::stratified_split(ds, plan, 0);
  const auto train_data = encode::encode_dataset(train_side, alphabet, l_max, ds.classes);
  const auto test_data = encode::encode_dataset(test_side, alphabet, l_max, ds.classes);

  const auto seeds = repeat_seeds(cfg.seed, 0);
  Rng init_rng(seeds.model_init);
  auto model = snn::SnnModel::init(train_data.input_dim(), cfg.hidden, ds.classes.size(),
                                   cfg.lif, init_rng);
  train::TrainConfig tcfg = cfg.tcfg;
  tcfg.seed = seeds.train;
  const auto history = train::train(model, train_data, tcfg);
  const auto ev = train::evaluate_model(model, test_data, history.wall_seconds);

  fs::create_directories(cfg.out_dir);
  snn::Checkpoint ckpt{std::move(model), cfg.alphabet_symbols,
                       cfg.catch_all == "none" ? std::nullopt
                                               : std::optional<char>(cfg.catch_all[0]),
                       l_max, ds.classes};
  snn::save_checkpoint_file(ckpt, (fs::path(cfg.out_dir) / "model.ckpt").string());
  write_history_csv(history, fs::path(cfg.out_dir) / "history.csv");
  write_json(metrics::report_json(ev.report, ev.detail, ds.classes),
             fs::path(cfg.out_dir) / "metrics.json");
  emit_manifest(cfg, "train");
}

void cmd_eval(const RunConfig& cfg) {
  if (cfg.checkpoint.empty()) throw std::runtime_error("eval needs eval.checkpoint");
  if (!fs::exists(cfg.checkpoint))
    throw std::runtime_error("checkpoint does not exist: " + cfg.checkpoint);
  const auto ckpt = snn::load_checkpoint_file(cfg.checkpoint);
  const auto ds = load_dataset(cfg);
  const auto data = encode::encode_dataset(ds, ckpt.alphabet(), ckpt.l_max, ckpt.class_names);
  const auto ev = train::evaluate_model(ckpt.model, data, 0.0);

  fs::create_directories(cfg.out_dir);
  write_json(metrics::report_json(ev.report, ev.detail, ckpt.class_names),
             fs::path(cfg.out_dir) / "metrics.json");
  {
    auto out = open_out(fs::path(cfg.out_dir) / "confusion.csv");
    metrics::write_confusion_csv(ev.cm, ckpt.class_names, out);
  }
  emit_manifest(cfg, "eval");
}

void cmd_crossval(const RunConfig& cfg) {
  const auto ds = load_dataset(cfg);
  const auto alphabet = cfg.alphabet();
  const std::size_t l_max = resolve_l_max(cfg, ds);

  seqio::SplitPlan plan = cfg.plan;
  plan.seed = cfg.seed;
  train::TrainConfig tcfg = cfg.tcfg;
  tcfg.seed = cfg.seed;
  const train::ModelSpec spec{cfg.lif, cfg.hidden};
  const auto rep = train::evaluate_repeated(ds, alphabet, l_max, spec, plan, tcfg, cfg.parallel);

  fs::create_directories(cfg.out_dir);
  for (std::size_t r = 0; r < rep.per_repeat.size(); ++r)
    write_json(metrics::report_json(rep.per_repeat[r]),
               fs::path(cfg.out_dir) / ("metrics_repeat_" + std::to_string(r) + ".json"));
  write_json(metrics::report_json(rep.mean), fs::path(cfg.out_dir) / "metrics_mean.json");
  emit_manifest(cfg, "crossval");
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"Spiking-network classification of protein sequences"};
  app.require_subcommand(1);

  struct CommandLine {
    std::string config_path;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flag_values;
  } cl;

  using Handler = void (*)(const RunConfig&);
  std::vector<std::pair<CLI::App*, Handler>> handlers;

  auto add_common = [&](CLI::App* sub, Handler fn) {
    sub->add_option("--config", cl.config_path, "config file (key = value lines)");
    sub->add_option("--set", cl.sets, "override one config key, e.g. --set train.epochs=5")
        ->take_all();
    auto shortcut = [&cl, sub](const std::string& flag, const std::string& key,
                               const std::string& help) {
      sub->add_option_function<std::string>(
          flag, [&cl, key](const std::string& v) { cl.flag_values.emplace_back(key, v); },
          help);
    };
    shortcut("--out", "run.out", "output directory");
    shortcut("--seed", "run.seed", "run seed");
    shortcut("--fasta", "data.fasta", "FASTA input path");
    shortcut("--labels", "data.labels", "id,label CSV path");
    shortcut("--l-max", "encode.l_max", "fixed encoding length (0 = dataset max)");
    shortcut("--epochs", "train.epochs", "training epochs");
    shortcut("--repeats", "split.repeats", "number of split repeats");
    handlers.emplace_back(sub, fn);
    return sub;
  };

  add_common(app.add_subcommand("datagen", "write a synthetic FASTA + label CSV"),
             &cmd_datagen);
  add_common(app.add_subcommand("encode", "write one-hot tensors and signal series"),
             &cmd_encode);
  auto* transform = add_common(
      app.add_subcommand("transform", "write RP/GAF/MTF matrices per record"), &cmd_transform);
  transform->add_option_function<std::string>(
      "--kind", [&cl](const std::string& v) { cl.flag_values.emplace_back("transform.kind", v); },
      "rp | gaf | mtf");
  transform->add_flag_callback(
      "--image", [&cl] { cl.flag_values.emplace_back("transform.image", "true"); },
      "also write grayscale PGM images");
  add_common(app.add_subcommand("train",
                                "train on split repeat 0; write checkpoint, history, metrics"),
             &cmd_train);
  auto* eval = add_common(
      app.add_subcommand("eval", "score a dataset with a checkpoint"), &cmd_eval);
  eval->add_option_function<std::string>(
      "--checkpoint",
      [&cl](const std::string& v) { cl.flag_values.emplace_back("eval.checkpoint", v); },
      "model checkpoint path");
  auto* crossval = add_common(
      app.add_subcommand("crossval", "repeated stratified splits; per-repeat + mean reports"),
      &cmd_crossval);
  crossval->add_flag_callback(
      "--parallel", [&cl] { cl.flag_values.emplace_back("run.parallel", "true"); },
      "run repeats on worker threads");

  std::vector<const char*> argv;
  argv.push_back("spikeseq");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());

    RunConfig cfg;
    if (!cl.config_path.empty()) load_config_file(cfg, cl.config_path);
    for (const auto& kv : cl.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("--set expects key=value, got: " + kv);
      apply_config_value(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    for (const auto& [key, value] : cl.flag_values) apply_config_value(cfg, key, value);

    for (const auto& [sub, fn] : handlers)
      if (sub->parsed()) {
        fn(cfg);
        return 0;
      }
    throw std::runtime_error("no command selected");
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace spikeseq::cli
