// Deterministic randomness helpers. The mt19937_64 output sequence is pinned
// by the standard; the bounded/real draws on top are written out by hand so
// every sampled artifact is reproducible across compilers and platforms.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace tweetprobe {

std::uint64_t splitmix64(std::uint64_t state);
std::uint64_t fnv1a64(std::string_view bytes);

// Stable derivation of a sub-seed from a run seed and a purpose label.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Unbiased draw from [0, n) via rejection; n must be > 0.
  std::size_t uniform_index(std::size_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tweetprobe
