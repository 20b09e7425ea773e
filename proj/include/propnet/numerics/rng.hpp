#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace propnet {

// Seeded generator with platform-independent derived distributions.
// std::mt19937_64 output is fully specified by the standard; the
// distribution helpers below avoid the implementation-defined std::
// distributions so identical seeds yield identical streams everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  // Derive an independent child stream.
  Rng split(std::uint64_t salt);

 private:
  std::mt19937_64 engine_;
};

}  // namespace propnet
