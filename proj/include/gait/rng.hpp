#pragma once

#include <cstdint>

namespace gait {

// Counter-based generator: the i-th draw of a stream is a pure function of
// (key, i), where the key is derived from the seed with a SplitMix64
// finalizer. `split` derives child streams from the key alone, so children
// do not depend on how many draws the parent has made.
//
// Uniform draws are bit-identical on every platform. Normal draws go through
// std::log / std::cos and inherit the libm's last-ulp behaviour.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  Rng split(std::uint64_t key) const;

 private:
  Rng(std::uint64_t seed, std::uint64_t key);

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace gait
