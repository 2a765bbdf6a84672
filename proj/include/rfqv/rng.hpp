#pragma once

#include <cstdint>

namespace rfqv {

// 64-bit finalizer (splitmix64). Used both as the stream-advance mix and for
// deriving child keys, so every stream is a pure function of its key material.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Fold additional key material into a seed; order-sensitive.
inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t v) {
  return mix64(key ^ (v + 0x9E3779B97F4A7C15ULL + (key << 6) + (key >> 2)));
}

// Standard-normal quantile (Wichura's AS 241, double precision).
double normal_quantile(double p);

// Counter-based generator: the k-th output is a pure function of (key, k).
// Replicate/thread independence comes from deriving distinct keys, never from
// sharing a stream.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key), counter_(0) {}

  static Rng from(std::uint64_t master, std::uint64_t a) { return Rng(derive_key(master, a)); }
  static Rng from(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return Rng(derive_key(derive_key(master, a), b));
  }

  std::uint64_t next_u64() { return mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

  // uniform on (0,1), never returning an endpoint
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() { return normal_quantile(next_uniform()); }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace rfqv
