#ifndef QM_SAMPLING_HPP
#define QM_SAMPLING_HPP

#include <cstdint>
#include <vector>

#include "qm/instrument.hpp"
#include "qm/rng.hpp"

namespace qm {

// One measurement trajectory: per-step outcome, its probability under the
// current (normalized) state, and the normalized post-measurement state.
struct TrajectorySample {
  std::uint64_t seed = 0;
  std::uint64_t trajectory_index = 0;
  std::vector<Outcome> outcomes;
  std::vector<std::size_t> outcome_indices;  // canonical per-step indices
  std::vector<State> states;
  std::vector<double> weights;
};

// Instruments applied in order; step k uses chain[k % chain.size()], so the
// dim chain must close into a cycle when steps exceed the chain length.
struct InstrumentChain {
  std::vector<Instrument> stages;
  std::size_t steps = 0;

  InstrumentChain(std::vector<Instrument> stages_, std::size_t steps_ = 0);
  const Instrument& stage(std::size_t step) const {
    return stages[step % stages.size()];
  }
};

// Draws outcome x with probability tr[I_x(rho)] via philox4x32-10 addressed
// by (seed, trajectory, step); updates rho to I_x(rho)/tr[I_x(rho)]. A step
// where the total outcome mass falls below eps aborts with a "vanishing
// distribution" error.
TrajectorySample sample_trajectory(const InstrumentChain& chain,
                                   const State& rho0, std::uint64_t seed,
                                   std::uint64_t trajectory_index = 0,
                                   Tolerance tol = {});

// Joint-outcome counts over n trajectories. The joint index is mixed-radix
// over the per-step outcome counts (step 0 most significant). Trajectories
// are independent and counter-addressed, so the result is identical for any
// thread count; the OpenMP split is over trajectories.
struct BatchResult {
  std::vector<std::uint64_t> counts;   // length = product of per-step counts
  std::vector<std::size_t> radices;    // per-step outcome counts
  std::uint64_t trajectories = 0;
  // One byte per (trajectory, step) when recording is on: the canonical
  // outcome index drawn at that step, trajectory-major.
  std::vector<std::uint8_t> sequences;
};

BatchResult sample_batch(const InstrumentChain& chain, const State& rho0,
                         std::uint64_t seed, std::uint64_t trajectories,
                         bool parallel = true, Tolerance tol = {},
                         bool record_sequences = false);

// Analytic joint distribution of the chain (canonical joint-index order),
// computed by propagating every outcome path.
std::vector<double> chain_distribution(const InstrumentChain& chain,
                                       const State& rho0);

// Joint outcome tuple (concatenated per-step outcomes) for a joint index.
std::vector<Outcome> joint_outcome(const InstrumentChain& chain,
                                   std::size_t joint_index);

}  // namespace qm

#endif
