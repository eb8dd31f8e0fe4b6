#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based random streams. Every draw is a pure function of
// (master_seed, stream, step, slot), so ensembles can run replicas in any
// order, or in parallel, and reproduce bit-identical output.

namespace vclab::rng {

struct Block {
  std::array<uint32_t, 4> x;
};

// Philox4x32-10, reference constants from Salmon et al.
inline Block philox4x32(uint64_t key, uint32_t c0, uint32_t c1, uint32_t c2,
                        uint32_t c3) {
  uint32_t k0 = static_cast<uint32_t>(key);
  uint32_t k1 = static_cast<uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    const uint64_t p0 = 0xD2511F53ull * c0;
    const uint64_t p1 = 0xCD9E8D57ull * c2;
    const uint32_t n0 = static_cast<uint32_t>(p1 >> 32) ^ c1 ^ k0;
    const uint32_t n1 = static_cast<uint32_t>(p1);
    const uint32_t n2 = static_cast<uint32_t>(p0 >> 32) ^ c3 ^ k1;
    const uint32_t n3 = static_cast<uint32_t>(p0);
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  return Block{{c0, c1, c2, c3}};
}

// Counter layout used by all simulation code.
inline Block block_at(uint64_t seed, uint32_t stream, uint64_t step,
                      uint32_t slot) {
  return philox4x32(seed, static_cast<uint32_t>(step),
                    static_cast<uint32_t>(step >> 32), slot, stream);
}

// step index reserved for initial-condition draws
inline constexpr uint64_t init_step = ~0ull;

inline uint64_t hi64(const Block& b) {
  return (static_cast<uint64_t>(b.x[0]) << 32) | b.x[1];
}
inline uint64_t lo64(const Block& b) {
  return (static_cast<uint64_t>(b.x[2]) << 32) | b.x[3];
}

inline double u01(uint64_t bits) {  // [0, 1)
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}
inline double u01_open(uint64_t bits) {  // (0, 1]
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

struct GaussPair {
  double z0, z1;
};

// Box-Muller over one block: two independent N(0,1) draws.
inline GaussPair gauss_pair(uint64_t seed, uint32_t stream, uint64_t step,
                            uint32_t slot) {
  const Block b = block_at(seed, stream, step, slot);
  const double r = std::sqrt(-2.0 * std::log(u01_open(hi64(b))));
  const double t = 6.283185307179586476925286766559 * u01(lo64(b));
  return GaussPair{r * std::cos(t), r * std::sin(t)};
}

// Scalar path: consecutive steps share a block and consume its two lanes.
inline double gauss_at(uint64_t seed, uint32_t stream, uint64_t step,
                       uint32_t slot) {
  const GaussPair p = gauss_pair(seed, stream, step >> 1, slot);
  return (step & 1) ? p.z1 : p.z0;
}

struct UniformPair {
  double u0, u1;
};

inline UniformPair uniform_pair(uint64_t seed, uint32_t stream, uint64_t step,
                                uint32_t slot) {
  const Block b = block_at(seed, stream, step, slot);
  return UniformPair{u01(hi64(b)), u01(lo64(b))};
}

inline uint64_t bits64(uint64_t seed, uint32_t stream, uint64_t step,
                       uint32_t slot) {
  return hi64(block_at(seed, stream, step, slot));
}

}  // namespace vclab::rng
