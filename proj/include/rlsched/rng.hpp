#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rlsched {

// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

// Portable random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard. The standard distributions are not
// portable, so every mapping below is defined here and consumes exactly one
// engine draw (normal() consumes two).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on the integers [lo, hi] by 128-bit multiply-high. Bias is at
  // most (hi - lo + 1) / 2^64.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<unsigned __int128>(hi - lo) + 1;
    const auto scaled = (static_cast<unsigned __int128>(next_u64()) * span) >> 64;
    return lo + static_cast<std::int64_t>(scaled);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal by Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rlsched
