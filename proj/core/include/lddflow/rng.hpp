#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lddflow {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed, e.g. derive_seed(master, level, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

/// Seeded generator with distributions implemented here so that results do
/// not depend on the standard library's distribution algorithms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Exponential(rate) conditioned on being at most cap (inverse CDF).
  double truncated_exponential(double rate, double cap) {
    const double mass = -std::expm1(-rate * cap);
    return -std::log1p(-uniform() * mass) / rate;
  }

private:
  std::mt19937_64 engine_;
};

} // namespace lddflow
