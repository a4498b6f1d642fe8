#ifndef QM_RNG_HPP
#define QM_RNG_HPP

#include <array>
#include <cstdint>

namespace qm {

// Philox4x32-10 counter-based generator. Stateless: every draw is addressed
// by (key, counter), so trajectory t / step s / draw d reads the same value
// no matter which thread computes it or in what order.
struct Philox4x32 {
  static constexpr const char* name = "philox4x32-10";

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key);
};

// Uniform double in [0, 1) addressed by (seed; trajectory, step, draw).
double uniform_at(std::uint64_t seed, std::uint64_t trajectory,
                  std::uint32_t step, std::uint32_t draw);

}  // namespace qm

#endif
