#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace invaudit {

// Counter-based random streams. Every draw is keyed by
// (seed, product, week, stream, index), so two rollouts that share a seed
// see identical demand and lead-time randomness regardless of the actions
// taken in between (common random numbers).
enum class Stream : std::uint64_t {
  demand = 1,
  vlt = 2,
  bandit_action = 3,
  train_action = 4,
  product_gen = 5,
  tuning = 6,
  schedule = 7,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t product = 0;
  std::uint64_t week = 0;
  Stream stream = Stream::demand;
  std::uint64_t index = 0;
};

inline std::uint64_t draw_bits(const RngKey& k) {
  using detail::splitmix64;
  std::uint64_t h = splitmix64(k.seed);
  h = splitmix64(h ^ k.product);
  h = splitmix64(h ^ k.week);
  h = splitmix64(h ^ static_cast<std::uint64_t>(k.stream));
  h = splitmix64(h ^ k.index);
  return h;
}

// Uniform in [0, 1).
inline double draw_uniform(const RngKey& k) {
  return static_cast<double>(draw_bits(k) >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n).
inline std::uint64_t draw_below(const RngKey& k, std::uint64_t n) {
  return draw_bits(k) % n;
}

// Smallest k with Poisson CDF(k) >= u, by sequential summation.
inline long poisson_icdf(double lambda, double u) {
  if (lambda <= 0.0) return 0;
  if (lambda > 700.0) throw std::invalid_argument("poisson rate too large");
  double p = std::exp(-lambda);
  double c = p;
  long k = 0;
  const long cap =
      static_cast<long>(lambda + 20.0 * std::sqrt(lambda) + 100.0);
  while (u > c && k < cap) {
    ++k;
    p *= lambda / static_cast<double>(k);
    c += p;
  }
  return k;
}

// Negative binomial with mean `mean` and dispersion r (variance
// mean + mean^2 / r), inverted by CDF summation.
inline long neg_binomial_icdf(double mean, double r, double u) {
  if (mean <= 0.0) return 0;
  const double q = mean / (r + mean);  // success probability per count
  double p = std::pow(1.0 - q, r);
  double c = p;
  long k = 0;
  const double sd = std::sqrt(mean + mean * mean / r);
  const long cap = static_cast<long>(mean + 20.0 * sd + 100.0);
  while (u > c && k < cap) {
    p *= q * (r + static_cast<double>(k)) / (static_cast<double>(k) + 1.0);
    ++k;
    c += p;
  }
  return k;
}

}  // namespace invaudit
