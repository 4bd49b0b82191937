#pragma once

#include <cstdint>
#include <cmath>
#include <cassert>
#include <array>

namespace rif {

// Counter-based generator (Threefry-2x64, 20 rounds). Every random draw in the
// library is a pure function of (master seed, lane, vertex key, index), so
// replicas parallelize without shared state and translation-equivariance can
// be tested bit-exactly.

namespace detail {

inline constexpr uint64_t rotl64(uint64_t x, int r) {
  return (x << r) | (x >> (64 - r));
}

struct U128 {
  uint64_t a, b;
};

inline U128 threefry2x64(uint64_t c0, uint64_t c1, uint64_t k0, uint64_t k1) {
  constexpr int kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};
  const uint64_t ks[3] = {k0, k1, 0x1BD11BDAA9FC1A22ull ^ k0 ^ k1};
  uint64_t x0 = c0 + ks[0];
  uint64_t x1 = c1 + ks[1];
  for (int r = 0; r < 20; ++r) {
    x0 += x1;
    x1 = rotl64(x1, kRot[r & 7]);
    x1 ^= x0;
    if (((r + 1) & 3) == 0) {
      const uint64_t s = static_cast<uint64_t>((r + 1) >> 2);
      x0 += ks[s % 3];
      x1 += ks[(s + 1) % 3] + s;
    }
  }
  return {x0, x1};
}

inline constexpr uint64_t splitmix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// 128-bit vertex identity fed into the counter/key halves. Lattice packs raw
// coordinates (injective); tree vertices use two independent path hashes.
struct VertexKey {
  uint64_t a = 0, b = 0;
};

// Stream lanes. Adding a lane never perturbs existing ones.
enum class Lane : uint32_t {
  StartCount = 1,
  WalkStep = 2,
  Label = 3,
  Coin = 4,
  SltPriority = 5,
  FieldGap = 6,
  BridgeAlloc = 7,
  BridgeStep = 8,
  ContStep = 9,
  Relabel = 10,
  BwdStep = 11,
  FwdStep = 12,
  AtlasU = 13,
  Scratch = 14,
  SltR2Label = 15,
};

class Field {
 public:
  explicit Field(uint64_t master_seed, uint64_t replica = 0)
      : k0_(detail::splitmix64(master_seed ^ detail::splitmix64(replica + 0x51ab3c7du))) {}

  // Raw 64 uniform bits for (lane, vertex, index).
  uint64_t bits(Lane lane, const VertexKey& v, uint64_t index) const {
    const uint64_t lk = detail::splitmix64(k0_ ^ (0xA24BAED4963EE407ull * (static_cast<uint64_t>(lane) + 1)));
    return detail::threefry2x64(index, v.a, lk, v.b ^ k0_).a;
  }

  // Uniform on the open interval (0,1); safe for log().
  double u01(Lane lane, const VertexKey& v, uint64_t index) const {
    return (static_cast<double>(bits(lane, v, index) >> 11) + 0.5) * 0x1.0p-53;
  }

  double exp1(Lane lane, const VertexKey& v, uint64_t index) const {
    return -std::log(u01(lane, v, index));
  }

  // Uniform in {0,...,n-1} from one draw.
  uint32_t pick(Lane lane, const VertexKey& v, uint64_t index, uint32_t n) const {
    const double u = u01(lane, v, index);
    uint32_t k = static_cast<uint32_t>(u * n);
    return k >= n ? n - 1 : k;
  }

  // Poisson by CDF inversion; fine for the desk-scale means used here.
  uint32_t poisson(Lane lane, const VertexKey& v, uint64_t index, double mean) const {
    assert(mean >= 0.0 && mean < 60.0);
    if (mean == 0.0) return 0;
    const double u = u01(lane, v, index);
    double p = std::exp(-mean);
    double cum = p;
    uint32_t k = 0;
    while (u > cum && k < 4096) {
      ++k;
      p *= mean / k;
      cum += p;
    }
    return k;
  }

  uint64_t seed_hash() const { return k0_; }

 private:
  uint64_t k0_;
};

// Stream-index packing: a 44-bit context (salt, occurrence, tag) composed
// with a 20-bit step counter. Contexts built by pack_idx3 nest into pack_idx.
inline uint64_t pack_idx(uint64_t ctx, uint64_t step) {
  assert(ctx < (1ull << 44) && step < (1ull << 20));
  return (ctx << 20) | step;
}

inline uint64_t pack_idx3(uint64_t salt, uint64_t occ, uint64_t tag) {
  assert(salt < (1ull << 12) && occ < (1ull << 24) && tag < (1ull << 8));
  return (salt << 32) | (occ << 8) | tag;
}

}  // namespace rif
