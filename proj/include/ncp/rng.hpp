#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ncp {

// Deterministic, platform-independent RNG used everywhere in the library.
// splitmix64 core; all sampling routines consume a fixed number of draws so
// replays are byte-identical across thread schedules and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased (rejection sampling).
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("bounded: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; always consumes exactly two uniforms.
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Poisson by inversion (sequential search); adequate for small rates.
  long poisson(double rate) {
    if (!(rate >= 0.0)) throw std::invalid_argument("poisson: rate must be >= 0");
    const double u = uniform01();
    double p = std::exp(-rate);
    double cum = p;
    long k = 0;
    while (u > cum && k < 10000) {
      ++k;
      p *= rate / static_cast<double>(k);
      cum += p;
    }
    return k;
  }

  // Independent stream derived from (seed, stream id); order-free.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    r.next_u64();
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

// Random m-subset of [0, n) without replacement; result order is random.
inline std::vector<int> sample_without_replacement(int n, int m, Rng& rng) {
  if (m < 0 || m > n) throw std::invalid_argument("sample_without_replacement: need 0 <= m <= n");
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < m; ++i) {
    int j = i + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  return pool;
}

inline void shuffle_ids(std::vector<int>& ids, Rng& rng) {
  for (int i = static_cast<int>(ids.size()) - 1; i > 0; --i) {
    int j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(i + 1)));
    std::swap(ids[i], ids[j]);
  }
}

}  // namespace ncp
