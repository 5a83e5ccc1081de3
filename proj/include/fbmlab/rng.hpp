#pragma once

#include <cstdint>
#include <cmath>

namespace fbmlab::rng {

// SplitMix64 finalizer. Passes BigCrush as the output function of a Weyl
// sequence, which is exactly how CounterStream uses it.
inline uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Purpose tags keep unrelated consumers of the same (seed, index) pair on
/// disjoint streams.
enum class StreamKind : uint64_t {
  path_coordinate = 1,
  sample_sweep = 2,
  generic = 3,
};

/// Counter-based stream keyed by (seed, index, lane, kind). Draw i is a pure
/// function of the key and i, so streams can be evaluated out of order and
/// in parallel with bit-identical results.
class CounterStream {
public:
  CounterStream(uint64_t seed, uint64_t index, uint32_t lane,
                StreamKind kind = StreamKind::generic) {
    uint64_t h = mix64(seed);
    h = mix64(h ^ index);
    h = mix64(h ^ (static_cast<uint64_t>(lane) | (static_cast<uint64_t>(kind) << 32)));
    key_ = h;
  }

  uint64_t bits(uint64_t i) const { return mix64(key_ + i * 0x9E3779B97F4A7C15ULL); }

  /// Uniform draw in the open interval (0,1).
  double uniform(uint64_t i) const {
    return static_cast<double>(bits(i) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  /// i-th standard normal. Box-Muller over draw pairs; draw 2j and 2j+1
  /// share the same two uniforms.
  double normal(uint64_t i) const {
    const uint64_t j = i >> 1;
    const double u1 = uniform(2 * j);
    const double u2 = uniform(2 * j + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    return (i & 1) ? r * std::sin(theta) : r * std::cos(theta);
  }

private:
  uint64_t key_ = 0;
};

/// Sequential adaptor for consumers that just want "next normal".
class NormalSequence {
public:
  explicit NormalSequence(CounterStream s) : s_(s) {}
  double next() { return s_.normal(i_++); }

private:
  CounterStream s_;
  uint64_t i_ = 0;
};

} // namespace fbmlab::rng
