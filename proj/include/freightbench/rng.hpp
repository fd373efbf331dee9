#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace freightbench {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derive an independent stream seed from a master seed and a key sequence.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t k : keys) s = splitmix64(s ^ splitmix64(k));
  return s;
}

// Deterministic RNG with hand-rolled distributions. std::mt19937_64 output is
// fully specified by the standard, and we avoid std::*_distribution whose
// algorithms are implementation-defined, so streams are reproducible across
// toolchains, not just across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = bits();
    while (x >= limit) x = bits();
    return x % n;
  }

  // Standard normal via Box-Muller (no spare caching, stream stays simple).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Index draw proportional to nonnegative weights (cdf must be the inclusive
  // prefix sums of the weights; cdf.back() is the total).
  std::size_t weighted_index(const std::vector<double>& cdf) {
    const double u = uniform01() * cdf.back();
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cdf[mid] > u) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    shuffle(p);
    return p;
  }

  // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(uniform_int(n - i));
      std::swap(p[i], p[j]);
    }
    p.resize(k);
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace freightbench
