#pragma once

#include <cstdint>

namespace raimi {

// splitmix64; every seeded choice in the library goes through this so that
// artifacts are reproducible across platforms and runs.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t x) {
  uint64_t s = x;
  return splitmix64(s);
}

// Stateless hash of (seed, index); basis of all procedural colorings.
inline uint64_t hash_index(uint64_t seed, uint64_t idx) {
  uint64_t s = seed ^ mix64(idx + 1);
  return splitmix64(s);
}

// Per-trial seeds derived from a root seed.
inline uint64_t derive_seed(uint64_t root, uint64_t trial) {
  return hash_index(root, trial);
}

class SplitMix {
 public:
  explicit SplitMix(uint64_t seed) : state_(seed) {}
  uint64_t next() { return splitmix64(state_); }
  // Modulo bias is negligible for the n used here (n << 2^64).
  uint64_t next_below(uint64_t n) { return n ? next() % n : 0; }
  uint64_t next_bits53() { return next() >> 11; }
  double next_unit() { return static_cast<double>(next_bits53()) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

}  // namespace raimi
