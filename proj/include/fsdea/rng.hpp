#pragma once

#include <cstdint>

namespace fsdea {

/// Counter-based random stream built on the splitmix64 finalizer.
///
/// Draw k of the stream with seed s is
///   mix(s + (k+1) * 0x9E3779B97F4A7C15)
/// where mix is the splitmix64 output function. The stream is therefore
/// reproducible from (seed, counter) alone in any language with 64-bit
/// unsigned arithmetic.
class CounterRng {
 public:
  explicit CounterRng(uint64_t seed, uint64_t counter = 0)
      : seed_(seed), counter_(counter) {}

  uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal();

  uint64_t counter() const { return counter_; }

  /// Independent stream for a labeled substream (unit, column, ...).
  static uint64_t derive_seed(uint64_t seed, uint64_t label);

 private:
  uint64_t seed_;
  uint64_t counter_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fsdea
