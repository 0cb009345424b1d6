#pragma once

#include <cstdint>
#include <random>

namespace lsaga {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based uniform index stream: draw n depends only on (seed, n), so
/// runs that share a seed see the same sampling sequence regardless of what
/// else they do with randomness.
class IndexSampler {
 public:
  explicit IndexSampler(std::uint64_t seed) : key_(mix64(seed ^ 0x5A6A5A6A5A6A5A6Aull)) {}

  std::uint64_t raw(std::uint64_t counter) const {
    return mix64(key_ + counter * 0xD1B54A32D192ED03ull);
  }

  /// Uniform on {0, ..., count - 1}.
  std::size_t index(std::uint64_t counter, std::size_t count) const {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(raw(counter)) * count;
    return static_cast<std::size_t>(wide >> 64);
  }

 private:
  std::uint64_t key_;
};

/// Engine for randomness other than the index stream (initial points,
/// synthetic data, bootstrap). `stream` separates independent uses of a seed.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(mix64(seed) ^ mix64(stream + 0x1234567ull));
}

}  // namespace lsaga
