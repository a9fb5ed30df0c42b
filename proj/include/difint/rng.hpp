#pragma once

// Counter-style splitmix64 generator. Chosen over std::mt19937 because the
// output sequence is fully specified by the algorithm (no library-dependent
// distribution wrappers), which keeps sampled datasets reproducible across
// platforms and compilers.

#include <cstdint>

namespace difint {

class SplitMix64 {
 public:
  // Weyl increment and the two finalizer constants of splitmix64.
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + next_double() * (hi - lo); }

  // Deterministic per-stream seed: trial i of a run seeded with `master` uses
  // derive_stream(master, i). Pure function of its arguments.
  static std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
    return mix(master + (index + 1) * kGamma);
  }

 private:
  std::uint64_t state_;
};

}  // namespace difint
