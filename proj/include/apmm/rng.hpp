#pragma once

#include <cstdint>
#include <random>

namespace apmm {

// Seeded generator built on the raw mt19937_64 output stream. Distribution
// helpers are hand-rolled so identical seeds give identical streams on every
// platform and standard library.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  std::uint32_t next_u32() { return static_cast<std::uint32_t>(engine_()); }

  /// Uniform in [0, n). n must be positive; modulo bias is irrelevant here.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  /// Uniform in [lo, hi], inclusive.
  std::size_t range(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(below(hi - lo + 1));
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + unit() * (hi - lo); }

private:
  std::mt19937_64 engine_;
};

}  // namespace apmm
