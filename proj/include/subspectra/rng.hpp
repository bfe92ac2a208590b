#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

#include "subspectra/types.hpp"

namespace subspectra {

// Deterministic random source behind every generator in the library.
//
// Reproducibility across platforms matters more than statistical finesse
// here.  std::mt19937_64's word sequence is pinned by the standard, but the
// standard distributions are not, so uniform and normal variates are derived
// from raw engine words by hand.  Independent streams for one user seed are
// obtained by hashing a short purpose tag ("atoms", "noise", ...) into the
// engine seed, so generators drawing from different streams never share
// state regardless of call order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::string_view stream = {})
      : engine_(stream_seed(seed, stream)) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [lo, hi], inclusive, bias-free via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw InvalidSpec("uniform_int requires lo <= hi");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
    if (span == 0) return static_cast<std::int64_t>(engine_());  // full range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return lo + static_cast<std::int64_t>(draw % span);
  }

  // Standard normal via Box-Muller; draws two words per call.
  double normal() {
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi() * u2);
  }

  // Circular complex normal with E|z|^2 = 1.
  std::complex<double> complex_normal() {
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-std::log(u1));
    return {radius * std::cos(two_pi() * u2), radius * std::sin(two_pi() * u2)};
  }

 private:
  static constexpr double two_pi() { return 6.283185307179586476925286766559; }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  static std::uint64_t stream_seed(std::uint64_t seed, std::string_view stream) {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the tag bytes
    for (const char c : stream) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return splitmix64(seed ^ splitmix64(h));
  }

  std::mt19937_64 engine_;
};

}  // namespace subspectra
