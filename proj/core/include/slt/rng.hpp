#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace slt {

// SplitMix64 finalizer. Bijective on uint64, used both as a seed scrambler
// and to derive disjoint per-task streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Purpose tag for derived streams; part of the packed stream id.
enum class StreamKind : std::uint64_t {
  dataset = 1,
  test_set = 2,
  mcmc = 3,
  mcmc_retry = 4,
  fisher = 5,
  chain = 6,
};

// Injective map (master, n, rep, kind) -> seed: the packed id is unique per
// (n, rep, kind) and mix64 is a bijection, so distinct tasks never share a
// stream for a fixed master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n,
                                 std::uint64_t rep, StreamKind kind) {
  if (n >= (1ULL << 34) || rep >= (1ULL << 24))
    throw std::invalid_argument("derive_seed: n or rep out of packable range");
  const std::uint64_t packed =
      (n << 28) | (rep << 4) | static_cast<std::uint64_t>(kind);
  return mix64(mix64(master) ^ packed);
}

// Deterministic RNG stream. Gaussians use the Marsaglia polar method rather
// than std::normal_distribution so the draw sequence is pinned by this code,
// not by the standard library implementation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  std::uint64_t u64() { return eng_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace slt
