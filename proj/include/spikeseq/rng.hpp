#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace spikeseq {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from the run seed and a purpose tag
// (e.g. "split/0/B.1.1.7"). Adding a new tagged consumer never perturbs the
// streams of existing ones.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the tag bytes
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return mix64(base ^ mix64(h));
}

// mt19937_64 behind fixed sampling schemes, so streams are bit-identical
// across standard library implementations (std::uniform_*_distribution is
// not pinned by the standard).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t base, std::string_view tag) : engine_(derive_seed(base, tag)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 significant bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n); n must be nonzero.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t excess = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
    std::uint64_t x = next();
    while (excess != 0 && x > UINT64_MAX - excess) x = next();
    return x % n;
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      using std::swap;
      swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace spikeseq
