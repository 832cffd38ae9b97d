#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spikeseq/seqio.hpp"

namespace spikeseq::encode {

// Residue symbol set plus an optional catch-all that unknown raw characters
// fold onto. Padding (all-zero OHE rows, signal value 0) is positional and is
// never a symbol.
class Alphabet {
 public:
  Alphabet(std::string symbols, std::optional<char> catch_all = std::nullopt);

  // The 20 canonical amino acids in lexicographic order followed by the 'X'
  // catch-all; any other raw character folds to 'X'.
  static const Alphabet& canonical();

  std::size_t size() const { return symbols_.size(); }
  const std::string& symbols() const { return symbols_; }
  std::optional<char> catch_all() const { return catch_all_; }
  char symbol(std::size_t index) const { return symbols_[index]; }

  // 0-based index of fold(raw); throws if the character is unknown and no
  // catch-all is configured.
  int fold(char raw) const;

 private:
  std::string symbols_;
  std::optional<char> catch_all_;
  std::array<std::int8_t, 256> index_{};
};

// L_max x |alphabet| binary matrix stored as one alphabet index per non-pad
// row; rows at and past true_length are all zero.
struct OneHotTensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t true_length = 0;
  std::vector<int> codes;  // size true_length

  double entry(std::size_t i, std::size_t j) const {
    return (i < true_length && codes[i] == static_cast<int>(j)) ? 1.0 : 0.0;
  }
  double row_sum(std::size_t i) const { return i < true_length ? 1.0 : 0.0; }
};

// Length-L_max integer series: 1-based alphabet index, 0 past true_length.
struct SignalSeries {
  std::vector<int> values;
  std::size_t true_length = 0;
};

OneHotTensor one_hot_encode(std::string_view seq, const Alphabet& alphabet, std::size_t l_max);
SignalSeries signal_encode(std::string_view seq, const Alphabet& alphabet, std::size_t l_max);

// Round-trip decoders; both recover fold(seq) exactly.
std::string decode(const OneHotTensor& ohe, const Alphabet& alphabet);
std::string decode(const SignalSeries& signal, const Alphabet& alphabet);

// A dataset encoded against a fixed class list (targets index into it).
struct EncodedDataset {
  std::vector<OneHotTensor> inputs;
  std::vector<int> targets;
  std::vector<std::string> classes;
  std::size_t l_max = 0;
  std::size_t alphabet_size = 0;

  std::size_t size() const { return inputs.size(); }
  std::size_t input_dim() const { return l_max * alphabet_size; }
};

EncodedDataset encode_dataset(const seqio::Dataset& ds, const Alphabet& alphabet,
                              std::size_t l_max);
EncodedDataset encode_dataset(const seqio::Dataset& ds, const Alphabet& alphabet,
                              std::size_t l_max, const std::vector<std::string>& classes);

}  // namespace spikeseq::encode
