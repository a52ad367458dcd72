#pragma once

#include <cstdint>
#include <random>

namespace d2d {

// Seedable random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; uniform and normal variates are drawn
// with our own transforms so a seed reproduces bit-identical results on any
// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::uint64_t seed() const noexcept { return seed_; }

  // Independent child stream with a deterministic sub-seed. Splitting the
  // same parent with the same id always yields the same child.
  Rng split(std::uint64_t stream_id) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace d2d
