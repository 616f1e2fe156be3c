#include "dircal/rng.hpp"

#include <cmath>
#include <numbers>

namespace dircal::rng {

std::uint64_t Stream::next_below(std::uint64_t n) {
  // Largest multiple of n representable below 2^64.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x < limit) return x % n;
  }
}

double Stream::next_normal() {
  double u1 = next_uniform();
  while (u1 <= 0.0) u1 = next_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int categorical(const Eigen::Ref<const Eigen::RowVectorXd>& p, double u) {
  double cumulative = 0.0;
  int last_positive = 0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    if (p(j) > 0.0) last_positive = static_cast<int>(j);
    cumulative += p(j);
    if (u < cumulative) return static_cast<int>(j);
  }
  return last_positive;
}

}  // namespace dircal::rng
