#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace fqnprobe {

/// 64-bit FNV-1a over bytes. Stable across platforms; used for config ids and
/// per-task stream derivation, never for untrusted input.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

/// SplitMix64 generator. The standard-library engines and distributions are
/// implementation-defined, so everything that must reproduce byte-identical
/// output draws from this instead.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, n); n must be positive. Rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~0ull - ~0ull % n;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates with our own bounded draws.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Derives an independent stream from a base seed and a string key.
inline SplitMix64 derive_rng(std::uint64_t seed, std::string_view key) {
  SplitMix64 mixer(seed ^ (fnv1a64(key) + 0x9e3779b97f4a7c15ull));
  return SplitMix64(mixer.next());
}

}  // namespace fqnprobe
