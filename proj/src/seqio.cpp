#include "spikeseq/seqio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spikeseq/rng.hpp"

namespace spikeseq::seqio {

namespace {

constexpr std::string_view kCanonicalResidues = "ACDEFGHIKLMNPQRSTVWY";

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_residue(char c) {
  return (c >= 'A' && c <= 'Z') || c == '*' || c == '-';
}

}  // namespace

std::size_t Dataset::max_length() const {
  std::size_t n = 0;
  for (const auto& r : records) n = std::max(n, r.residues.size());
  return n;
}

int Dataset::class_index(const std::string& label) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) return -1;
  return static_cast<int>(it - classes.begin());
}

Dataset Dataset::from_records(std::vector<SequenceRecord> records) {
  Dataset ds;
  std::set<std::string> ids;
  std::set<std::string> labels;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second)
      throw std::runtime_error("duplicate sequence id: " + r.id);
    labels.insert(r.label);
  }
  ds.records = std::move(records);
  ds.classes.assign(labels.begin(), labels.end());
  return ds;
}

Dataset parse_fasta(std::istream& in, const LabelTable* labels) {
  std::vector<SequenceRecord> records;
  std::string header;
  std::string body;
  bool in_record = false;

  auto flush = [&]() {
    if (!in_record) return;
    std::string id = header;
    std::string label;
    if (auto pos = header.rfind('|'); pos != std::string::npos) {
      id = header.substr(0, pos);
      label = header.substr(pos + 1);
    }
    if (labels) {
      auto it = labels->find(id);
      if (it == labels->end())
        throw std::runtime_error("no label for sequence id: " + id);
      label = it->second;
    }
    if (label.empty())
      throw std::runtime_error("no label for sequence id: " + id);
    if (body.empty())
      throw std::runtime_error("empty sequence body for " + id);
    for (char& c : body) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (!valid_residue(c))
        throw std::runtime_error("invalid residue character '" + std::string(1, c) +
                                 "' in sequence " + id);
    }
    records.push_back({std::move(id), std::move(body), std::move(label)});
    body.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '>') {
      flush();
      header = trim(line.substr(1));
      if (header.empty()) throw std::runtime_error("empty FASTA header");
      in_record = true;
    } else {
      if (!in_record) throw std::runtime_error("sequence data before first FASTA header");
      body += line;
    }
  }
  flush();
  return Dataset::from_records(std::move(records));
}

Dataset parse_fasta_file(const std::string& fasta_path, const std::string& label_csv_path) {
  std::ifstream fasta(fasta_path);
  if (!fasta) throw std::runtime_error("cannot open FASTA file: " + fasta_path);
  if (label_csv_path.empty()) return parse_fasta(fasta);
  std::ifstream csv(label_csv_path);
  if (!csv) throw std::runtime_error("cannot open label CSV: " + label_csv_path);
  LabelTable table = parse_label_csv(csv);
  return parse_fasta(fasta, &table);
}

void write_fasta(const Dataset& ds, std::ostream& out) {
  for (const auto& r : ds.records) {
    out << '>' << r.id << '|' << r.label << '\n';
    for (std::size_t i = 0; i < r.residues.size(); i += 60)
      out << r.residues.substr(i, 60) << '\n';
  }
}

LabelTable parse_label_csv(std::istream& in) {
  LabelTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("label CSV line has no comma: " + line);
    std::string id = trim(line.substr(0, comma));
    std::string label = trim(line.substr(comma + 1));
    if (first && id == "id" && label == "label") {  // optional header row
      first = false;
      continue;
    }
    first = false;
    if (!table.emplace(std::move(id), std::move(label)).second)
      throw std::runtime_error("duplicate id in label CSV");
  }
  return table;
}

void write_label_csv(const Dataset& ds, std::ostream& out) {
  out << "id,label\n";
  for (const auto& r : ds.records) out << r.id << ',' << r.label << '\n';
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, const SplitPlan& plan,
                                             std::size_t repeat_index) {
  if (plan.repeats < 1) throw std::invalid_argument("split repeats must be >= 1");
  if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must lie in (0,1)");
  if (repeat_index >= plan.repeats)
    throw std::invalid_argument("repeat_index out of range");

  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    by_class[ds.records[i].label].push_back(i);

  std::vector<std::size_t> train_idx, test_idx;
  for (auto& [label, idx] : by_class) {
    if (idx.size() < 2)
      throw std::runtime_error("class \"" + label + "\" has fewer than 2 records");
    Rng rng(plan.seed, "split/" + std::to_string(repeat_index) + "/" + label);
    rng.shuffle(idx);
    // epsilon guard: 0.7 * 10 evaluates below 7.0 in IEEE arithmetic
    auto n_train = static_cast<std::size_t>(
        std::floor(plan.train_fraction * static_cast<double>(idx.size()) + 1e-9));
    n_train = std::max<std::size_t>(1, n_train);
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + n_train);
    test_idx.insert(test_idx.end(), idx.begin() + n_train, idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto pick = [&](const std::vector<std::size_t>& idx) {
    std::vector<SequenceRecord> recs;
    recs.reserve(idx.size());
    for (std::size_t i : idx) recs.push_back(ds.records[i]);
    return Dataset::from_records(std::move(recs));
  };
  return {pick(train_idx), pick(test_idx)};
}

Dataset generate_synthetic(std::size_t n_classes, const std::vector<std::size_t>& per_class,
                           std::size_t length, double mutation_rate, std::uint64_t seed) {
  if (n_classes < 2) throw std::invalid_argument("need at least 2 classes");
  if (per_class.size() != n_classes)
    throw std::invalid_argument("per_class size must equal n_classes");
  if (length == 0) throw std::invalid_argument("sequence length must be positive");
  if (!(mutation_rate >= 0.0 && mutation_rate < 0.5))
    throw std::invalid_argument("mutation_rate must lie in [0, 0.5)");

  std::vector<SequenceRecord> records;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const std::string label = "C" + std::to_string(c);

    // References and record mutations draw from separate streams, so the
    // reference for a given (seed, class) is independent of mutation_rate.
    Rng ref_rng(seed, "synthetic/ref/" + label);
    std::string reference(length, 'A');
    for (char& r : reference) r = kCanonicalResidues[ref_rng.below(kCanonicalResidues.size())];

    Rng rec_rng(seed, "synthetic/rec/" + label);
    for (std::size_t k = 0; k < per_class[c]; ++k) {
      std::string residues = reference;
      for (char& r : residues)
        if (rec_rng.uniform01() < mutation_rate)
          r = kCanonicalResidues[rec_rng.below(kCanonicalResidues.size())];
      records.push_back({label + "_" + std::to_string(k), std::move(residues), label});
    }
  }
  return Dataset::from_records(std::move(records));
}

}  // namespace spikeseq::seqio
