#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ovsim {

/// Seeded random source. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; the distributions below are written out by hand
/// because the std:: distributions are implementation-defined, and logs must
/// match across platforms.
class rng
{
public:
  explicit rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for a named component, e.g. derive(seed, "ue.victim").
  static rng derive(std::uint64_t seed, std::string_view stream)
  {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : stream) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return rng(splitmix(seed ^ splitmix(h)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [lo, hi], unbiased (rejection sampling).
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi)
  {
    if (hi <= lo) {
      return lo;
    }
    const std::uint64_t span = hi - lo;
    if (span == UINT64_MAX) {
      return engine_();
    }
    const std::uint64_t n     = span + 1;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t       x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + x % n;
  }

  std::int64_t uniform_signed(std::int64_t lo, std::int64_t hi)
  {
    return lo + static_cast<std::int64_t>(uniform(0, static_cast<std::uint64_t>(hi - lo)));
  }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform_real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

  /// Poisson draw (Knuth); only used with small means (pages per paging occasion).
  unsigned poisson(double mean)
  {
    if (mean <= 0.0) {
      return 0;
    }
    const double limit = std::exp(-mean);
    double       p     = 1.0;
    unsigned     k     = 0;
    do {
      ++k;
      p *= uniform_real();
    } while (p > limit);
    return k - 1;
  }

private:
  static std::uint64_t splitmix(std::uint64_t x)
  {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

} // namespace ovsim
