#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace svsp {

// Seeded generator with portable derived distributions. The standard
// <random> distributions are implementation-defined, so uniform/normal
// draws are built directly on mt19937_64 output to keep saved policies
// and synthetic datasets identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; one draw per call.
  double normal();

  // Uniform integer in [0, n) without modulo bias.
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

void shuffle(std::span<std::size_t> values, Rng& rng);

// splitmix64 finalizer; decorrelates per-episode and per-node seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace svsp
