#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace triage {

/// splitmix64 step. All seeded sampling in the library goes through this so
/// that results are identical across platforms and standard libraries
/// (std::shuffle and std::uniform_*_distribution are not portable).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (i * 8)) & 0xffULL;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Sub-seed for a keyed unit of work. Derived from the campaign seed and the
/// work key so per-item randomness is independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::string_view key = {}, std::int64_t a = 0,
                                 std::int64_t b = 0) {
  std::uint64_t h = fnv1a64(tag);
  h = fnv1a64(key, h);
  h = fnv1a64_u64(static_cast<std::uint64_t>(a), h);
  h = fnv1a64_u64(static_cast<std::uint64_t>(b), h);
  return fnv1a64_u64(seed, h);
}

inline std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

/// Small deterministic RNG used by the simulated scorer and samplers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return splitmix64(state_); }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), n > 0. Masked rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t mask = ~0ULL >> countl_zero_(n | 1);
    for (;;) {
      std::uint64_t r = next() & mask;
      if (r < n) return r;
    }
  }

  /// Deterministic Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }
  }

 private:
  static int countl_zero_(std::uint64_t v) {
    int n = 0;
    for (std::uint64_t probe = 1ULL << 63; probe && !(v & probe); probe >>= 1) ++n;
    return n;
  }

  std::uint64_t state_;
};

}  // namespace triage
