#pragma once

// Counter-based pseudo-random numbers.
//
// Every draw is a pure function of (seed, stream, counter): the SplitMix64
// finalizer is applied to the seed, the result is xored with the stream
// index and mixed again, then xored with the counter and mixed a third time.
// The top 53 bits of the final word give a uniform double in [0, 1). No
// platform RNG or math-library randomness is involved, so results are
// bit-identical across platforms and independent of evaluation order.

#include <cstdint>

#include <Eigen/Core>

namespace dircal::rng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

/// Uniform double in [0, 1).
constexpr double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>(hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

/// Sequential view over one (seed, stream) pair.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() { return hash(seed_, stream_, counter_++); }
  double next_uniform() { return uniform(seed_, stream_, counter_++); }
  /// Uniform integer in [0, n) by rejection, n > 0.
  std::uint64_t next_below(std::uint64_t n);
  /// Standard normal by Box-Muller.
  double next_normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

/// Inverse-CDF draw from a probability row given u in [0, 1). Rounding
/// leftovers fall to the last class with positive probability.
int categorical(const Eigen::Ref<const Eigen::RowVectorXd>& p, double u);

}  // namespace dircal::rng
