#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace selfverify {

// Deterministic RNG used everywhere randomness is needed. std::mt19937 plus
// the standard distributions would not give byte-identical streams across
// standard libraries, so we keep a tiny splitmix64 generator and derive
// doubles ourselves. Same seed -> same stream, on every platform.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Modulo bias is irrelevant at our n.
  uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

  int int_in(int lo, int hi) {  // inclusive range
    return lo + int(below(uint64_t(hi - lo + 1)));
  }

 private:
  uint64_t state_;
};

// Order-sensitive mix of several seed parts into one 64-bit seed. Used to give
// each logical call site (problem, candidate, variant, ...) its own stream so
// results do not depend on thread interleaving.
inline uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
  uint64_t s = 0x51ed2700a1b3c5d7ULL;
  for (uint64_t p : parts) {
    uint64_t z = p;
    s ^= splitmix64(z) + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
  }
  return s;
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace selfverify
