#include "spikeseq/encode.hpp"

#include <algorithm>
#include <stdexcept>

namespace spikeseq::encode {

Alphabet::Alphabet(std::string symbols, std::optional<char> catch_all)
    : symbols_(std::move(symbols)), catch_all_(catch_all) {
  if (symbols_.empty()) throw std::invalid_argument("alphabet must not be empty");
  index_.fill(-1);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto c = static_cast<unsigned char>(symbols_[i]);
    if (index_[c] != -1)
      throw std::invalid_argument("alphabet symbols must be distinct");
    index_[c] = static_cast<std::int8_t>(i);
  }
  if (catch_all_ && index_[static_cast<unsigned char>(*catch_all_)] == -1)
    throw std::invalid_argument("catch-all character must be an alphabet symbol");
}

const Alphabet& Alphabet::canonical() {
  static const Alphabet a("ACDEFGHIKLMNPQRSTVWYX", 'X');
  return a;
}

int Alphabet::fold(char raw) const {
  int idx = index_[static_cast<unsigned char>(raw)];
  if (idx >= 0) return idx;
  if (catch_all_) return index_[static_cast<unsigned char>(*catch_all_)];
  throw std::runtime_error("character '" + std::string(1, raw) +
                           "' is not in the alphabet and no catch-all is set");
}

OneHotTensor one_hot_encode(std::string_view seq, const Alphabet& alphabet, std::size_t l_max) {
  if (seq.size() > l_max)
    throw std::runtime_error("sequence length " + std::to_string(seq.size()) +
                             " exceeds L_max " + std::to_string(l_max));
  OneHotTensor t;
  t.rows = l_max;
  t.cols = alphabet.size();
  t.true_length = seq.size();
  t.codes.reserve(seq.size());
  for (char c : seq) t.codes.push_back(alphabet.fold(c));
  return t;
}

SignalSeries signal_encode(std::string_view seq, const Alphabet& alphabet, std::size_t l_max) {
  if (seq.size() > l_max)
    throw std::runtime_error("sequence length " + std::to_string(seq.size()) +
                             " exceeds L_max " + std::to_string(l_max));
  SignalSeries s;
  s.true_length = seq.size();
  s.values.assign(l_max, 0);
  for (std::size_t i = 0; i < seq.size(); ++i)
    s.values[i] = alphabet.fold(seq[i]) + 1;  // 1-based, 0 reserved for padding
  return s;
}

std::string decode(const OneHotTensor& ohe, const Alphabet& alphabet) {
  std::string out;
  out.reserve(ohe.true_length);
  for (std::size_t i = 0; i < ohe.true_length; ++i)
    out.push_back(alphabet.symbol(static_cast<std::size_t>(ohe.codes[i])));
  return out;
}

std::string decode(const SignalSeries& signal, const Alphabet& alphabet) {
  std::string out;
  out.reserve(signal.true_length);
  for (std::size_t i = 0; i < signal.true_length; ++i)
    out.push_back(alphabet.symbol(static_cast<std::size_t>(signal.values[i] - 1)));
  return out;
}

EncodedDataset encode_dataset(const seqio::Dataset& ds, const Alphabet& alphabet,
                              std::size_t l_max) {
  return encode_dataset(ds, alphabet, l_max, ds.classes);
}

EncodedDataset encode_dataset(const seqio::Dataset& ds, const Alphabet& alphabet,
                              std::size_t l_max, const std::vector<std::string>& classes) {
  EncodedDataset out;
  out.classes = classes;
  out.l_max = l_max;
  out.alphabet_size = alphabet.size();
  out.inputs.reserve(ds.size());
  out.targets.reserve(ds.size());
  for (const auto& r : ds.records) {
    auto it = std::find(classes.begin(), classes.end(), r.label);
    if (it == classes.end())
      throw std::runtime_error("label \"" + r.label + "\" of record " + r.id +
                               " is not in the class list");
    out.inputs.push_back(one_hot_encode(r.residues, alphabet, l_max));
    out.targets.push_back(static_cast<int>(it - classes.begin()));
  }
  return out;
}

}  // namespace spikeseq::encode
