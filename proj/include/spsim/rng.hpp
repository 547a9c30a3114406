#pragma once

#include <cstdint>
#include <initializer_list>

namespace spsim {

// Deterministic, splittable random stream. The core is the SplitMix64
// finalizer, which is stable across platforms and compilers (pure 64-bit
// integer arithmetic). Streams are derived by folding a key into the state
// with the same mixer, so a stream keyed by (seed, step, position, tag) is
// reproducible regardless of the order in which sibling streams are drawn.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : state_(mix(seed + kGamma)) {}

  uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform in [0, n). Unbiased via rejection sampling. n must be > 0.
  uint64_t below(uint64_t n) {
    if (n <= 1) return 0;
    uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return unit() < p;
  }

  // Child stream independent of this one, keyed by the given words.
  RngStream split(std::initializer_list<uint64_t> key) const {
    uint64_t s = state_;
    for (uint64_t k : key) s = mix(s ^ mix(k + kGamma));
    return RngStream(FromState{}, s);
  }

  static uint64_t derive(uint64_t seed, std::initializer_list<uint64_t> key) {
    uint64_t s = mix(seed + kGamma);
    for (uint64_t k : key) s = mix(s ^ mix(k + kGamma));
    return s;
  }

 private:
  struct FromState {};
  RngStream(FromState, uint64_t raw) : state_(raw) {}

  static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint64_t state_;
};

}  // namespace spsim
