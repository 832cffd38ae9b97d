#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace spikeseq::seqio {

// One labeled amino-acid sequence. Residues are uppercase letters plus the
// '*' and '-' markers that occur in real spike data; ids are unique within a
// dataset.
struct SequenceRecord {
  std::string id;
  std::string residues;
  std::string label;

  bool operator==(const SequenceRecord&) const = default;
};

// A sequence collection with a stable class indexing: `classes` holds the
// distinct labels sorted lexicographically, and class_index maps a label to
// its position in 0..C-1.
struct Dataset {
  std::vector<SequenceRecord> records;
  std::vector<std::string> classes;

  std::size_t size() const { return records.size(); }
  std::size_t max_length() const;
  int class_index(const std::string& label) const;  // -1 if absent

  // Builds the sorted class list and checks id uniqueness.
  static Dataset from_records(std::vector<SequenceRecord> records);
};

struct SplitPlan {
  double train_fraction = 0.7;
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
};

using LabelTable = std::map<std::string, std::string>;

// FASTA ingestion. Headers are ">id|label"; when a label table is given it
// overrides the header label (lookup by id). Multi-line bodies are
// concatenated and uppercased.
Dataset parse_fasta(std::istream& in, const LabelTable* labels = nullptr);
Dataset parse_fasta_file(const std::string& fasta_path, const std::string& label_csv_path = "");

void write_fasta(const Dataset& ds, std::ostream& out);

// Two columns id,label; the header row is optional.
LabelTable parse_label_csv(std::istream& in);
void write_label_csv(const Dataset& ds, std::ostream& out);

// Deterministic per-class resample: max(1, floor(train_fraction * n_c))
// records of every class go to train, the rest to test. Membership depends
// only on (plan.seed, repeat_index).
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, const SplitPlan& plan,
                                             std::size_t repeat_index);

// Lineage-like synthetic data: one random reference sequence per class over
// the 20 canonical amino acids, each record an i.i.d. per-position
// substitution of its class reference. Labels are "C0".."C{n-1}".
Dataset generate_synthetic(std::size_t n_classes, const std::vector<std::size_t>& per_class,
                           std::size_t length, double mutation_rate, std::uint64_t seed);

}  // namespace spikeseq::seqio
