#pragma once

#include <cstdint>

// Counter-based random numbers: every draw is a pure function of
// (stream key, counter), so coordinates can be generated in any order,
// from any thread, with identical results.

namespace soficlab {

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 with random access: value #ctr of the stream keyed by `key`.
inline uint64_t keyed_u64(uint64_t key, uint64_t ctr) {
  return mix64(key + (ctr + 1) * kGolden);
}

// Independent stream key derived from a user seed and a stream id.
inline uint64_t derive_stream(uint64_t seed, uint64_t id) {
  return mix64(mix64(seed + kGolden) ^ mix64(id ^ 0xD6E8FEB86659FD93ULL));
}

// 53-bit uniform in [0,1).
inline double unit_double(uint64_t bits) {
  return double(bits >> 11) * (1.0 / 9007199254740992.0);
}

class CounterRng {
 public:
  explicit CounterRng(uint64_t key) : key_(key) {}
  static CounterRng stream(uint64_t seed, uint64_t id) {
    return CounterRng(derive_stream(seed, id));
  }

  uint64_t next_u64() { return keyed_u64(key_, ctr_++); }
  double next_unit() { return unit_double(next_u64()); }

  // Unbiased integer in [0, n) (Lemire's method).
  uint64_t below(uint64_t n) {
    uint64_t x = next_u64();
    __uint128_t m = (__uint128_t)x * n;
    uint64_t lo = (uint64_t)m;
    if (lo < n) {
      uint64_t t = (0 - n) % n;
      while (lo < t) {
        x = next_u64();
        m = (__uint128_t)x * n;
        lo = (uint64_t)m;
      }
    }
    return (uint64_t)(m >> 64);
  }

  template <class T>
  void shuffle(T* data, size_t n) {
    for (size_t i = n; i > 1; --i) {
      size_t j = (size_t)below(i);
      T tmp = data[i - 1];
      data[i - 1] = data[j];
      data[j] = tmp;
    }
  }

 private:
  uint64_t key_;
  uint64_t ctr_ = 0;
};

}  // namespace soficlab
