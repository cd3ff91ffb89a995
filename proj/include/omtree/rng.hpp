#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace omtree {

// Stateless mixing used to derive independent streams from a master seed.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

/// Seeded 64-bit generator with portable real/int conversions (the std
/// distributions are implementation-defined, this is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace omtree
