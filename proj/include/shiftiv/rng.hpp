#pragma once

#include <cmath>
#include <cstdint>

namespace shiftiv {

// splitmix64 step: advances the state by the golden-gamma constant and
// returns a finalized output. Passes BigCrush as a 64-bit generator and,
// critically here, lets independent streams be derived by key mixing alone.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64_next(s);
}

// Deterministic counter-style RNG. Streams for (seed, a, b, c, ...) are
// derived by hashing the keys into the state, so any unit of parallel work
// can own an independent stream that never depends on execution order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed ^ 0x5851F42D4C957F2DULL)) {}

  Rng derive(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
             std::uint64_t d = 0) const {
    Rng out(0);
    std::uint64_t s = state_;
    for (std::uint64_t key : {a, b, c, d}) {
      s = mix64(s ^ (key + 0x9E3779B97F4A7C15ULL + (s << 6) + (s >> 2)));
    }
    out.state_ = s;
    out.has_spare_ = false;
    return out;
  }

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform on [0, 1) with 53 significant bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n) via 128-bit multiply.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shiftiv
