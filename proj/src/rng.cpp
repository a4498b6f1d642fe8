#include "qm/rng.hpp"

namespace qm {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                       std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  std::uint32_t k0 = key[0];
  std::uint32_t k1 = key[1];
  for (int r = 0; r < 10; ++r) {
    round_once(ctr, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

double uniform_at(std::uint64_t seed, std::uint64_t trajectory,
                  std::uint32_t step, std::uint32_t draw) {
  const std::array<std::uint32_t, 4> out = Philox4x32::block(
      {static_cast<std::uint32_t>(trajectory),
       static_cast<std::uint32_t>(trajectory >> 32), step, draw},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace qm
