#include "propnet/numerics/rng.hpp"

#include "propnet/error.hpp"

namespace propnet {

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw ConfigError("Rng::index needs a positive bound");
  // Rejection sampling keeps the result exactly uniform.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

Rng Rng::split(std::uint64_t salt) {
  // splitmix64 finaliser over (next draw ^ salt)
  std::uint64_t z = engine_() ^ (salt + 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return Rng(z ^ (z >> 31));
}

}  // namespace propnet
