#pragma once

// xoshiro256++ seeded through splitmix64.  Everything is 64-bit integer
// arithmetic plus one exact double conversion, so streams are bit-identical
// across platforms and compilers — the backbone of run-level determinism.

#include <cstdint>
#include <vector>

namespace freqkan {

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1): top 53 bits scaled by 2^-53.
  double next_double();

  double uniform(double lo, double hi);

  // Uniform integer in [0, n), unbiased (rejection sampling); n must be > 0.
  std::uint64_t next_below(std::uint64_t n);

  // Derive an independent stream (e.g. one per purpose: init vs shuffling).
  Rng split();

  // In-place Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace freqkan
