#pragma once

#include <cstdint>

namespace erwlab {

// splitmix64 finalizer.  Used both as the output mix of the counter-based
// generator and as the site hash for quenched environments.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based generator: draw i of stream (seed, stream_id) is a pure
// function of (seed, stream_id, i).  Streams never overlap and a replica can
// be replayed in isolation, which keeps multi-threaded runs deterministic.
class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(uint64_t seed, uint64_t stream_id)
      : key_(mix64(mix64(seed) ^ (stream_id + 0x9e3779b97f4a7c15ull))) {}

  uint64_t next_u64() {
    uint64_t v = mix64(key_ + 0x9e3779b97f4a7c15ull * (++lo_));
    if (lo_ == 0) ++hi_;  // 128-bit counter; wrap folds into the key below
    return hi_ ? mix64(v ^ mix64(hi_)) : v;
  }

  // Uniform on [0,1), 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  uint64_t key() const { return key_; }

 private:
  uint64_t key_ = 0;
  uint64_t lo_ = 0, hi_ = 0;
};

// Stream id namespacing: the runner gives each (purpose, horizon slot,
// replica) its own stream so that adding an auxiliary simulation never shifts
// the draws of an existing one.
inline uint64_t stream_id(uint32_t purpose, uint32_t slot, uint32_t replica) {
  return (static_cast<uint64_t>(purpose) << 48) | (static_cast<uint64_t>(slot) << 32) | replica;
}

// FNV-1a 64-bit content hash; used for output manifests.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace erwlab
