#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace snpick {

// Finalizer from splitmix64 (Steele/Lea/Flood). Full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Child seed for stream `index` under `parent`. Siblings never collide and
// flipping any index bit scrambles the whole seed, so experiment code can
// hand out one stream per trial without coordinating ranges.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return mix64(parent ^ ((index + 1) * 0x9e3779b97f4a7c15ull));
}

// Uniform in [0, 1) keyed by an unordered id pair. The same (seed, pair)
// always maps to the same value no matter which order the ids arrive in.
inline double pair_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  if (a > b) std::swap(a, b);
  const std::uint64_t h = mix64(seed ^ (a * 0xbf58476d1ce4e5b9ull));
  const std::uint64_t k = mix64(h ^ (b * 0x94d049bb133111ebull));
  return (k >> 11) * 0x1.0p-53;
}

// splitmix64 stream. Deliberately self-contained: the standard library's
// distributions vary across implementations, and experiment outputs must be
// byte-identical everywhere, so all shaping lives here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // uniform in [0, 1), 53 significant bits
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi], both ends inclusive; rejection sampling
  // keeps every value exactly equally likely
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return lo + static_cast<std::int64_t>(next_u64());
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range + 1) % range;
    std::uint64_t draw = next_u64();
    while (draw > limit) draw = next_u64();
    return lo + static_cast<std::int64_t>(draw % range);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; the second variate of each pair is served on the next call
  double normal(double mean = 0.0, double sd = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sd * spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return mean + sd * r * std::cos(t);
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace snpick
