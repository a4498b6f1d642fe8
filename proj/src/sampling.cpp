#include "qm/sampling.hpp"

#include <cstdint>

namespace qm {

InstrumentChain::InstrumentChain(std::vector<Instrument> stages_,
                                 std::size_t steps_)
    : stages(std::move(stages_)), steps(steps_) {
  if (stages.empty()) throw ValidationError("instrument chain: empty");
  if (steps == 0) steps = stages.size();
  for (std::size_t k = 0; k + 1 < steps; ++k)
    if (stage(k).out_dim() != stage(k + 1).in_dim())
      throw DimensionError("instrument chain: dim mismatch between steps " +
                           std::to_string(k + 1) + " and " +
                           std::to_string(k + 2));
}

namespace {

// One step: returns the chosen canonical outcome index, its probability
// under rho, and the unnormalized post state. Selection scans outcomes in
// canonical order, so zero-probability outcomes are never drawn.
struct StepDraw {
  std::size_t outcome = 0;
  double probability = 0.0;
  ComplexMatrix post;
};

StepDraw draw_step(const Instrument& inst, const ComplexMatrix& rho, double u,
                   double eps) {
  std::vector<double> probs(inst.outcome_count());
  double total = 0.0;
  for (std::size_t x = 0; x < inst.outcome_count(); ++x) {
    probs[x] = inst.operation(x).apply(rho).trace().real();
    if (probs[x] < 0.0 && probs[x] > -eps) probs[x] = 0.0;
    total += probs[x];
  }
  if (total < eps)
    throw ValidationError("sample: vanishing distribution (total mass " +
                          std::to_string(total) + ")");
  const double threshold = u * total;
  double cum = 0.0;
  std::size_t chosen = inst.outcome_count();
  for (std::size_t x = 0; x < inst.outcome_count(); ++x) {
    cum += probs[x];
    if (probs[x] > 0.0 && cum > threshold) {
      chosen = x;
      break;
    }
  }
  if (chosen == inst.outcome_count()) {
    // Rounding pushed the threshold past the last increment; take the last
    // outcome with positive mass.
    for (std::size_t x = inst.outcome_count(); x-- > 0;)
      if (probs[x] > 0.0) {
        chosen = x;
        break;
      }
  }
  StepDraw out;
  out.outcome = chosen;
  out.probability = probs[chosen];
  out.post = inst.operation(chosen).apply(rho);
  return out;
}

}  // namespace

TrajectorySample sample_trajectory(const InstrumentChain& chain,
                                   const State& rho0, std::uint64_t seed,
                                   std::uint64_t trajectory_index,
                                   Tolerance tol) {
  if (rho0.dim() != chain.stage(0).in_dim())
    throw DimensionError("sample: state dim != chain input dim");
  TrajectorySample sample;
  sample.seed = seed;
  sample.trajectory_index = trajectory_index;
  ComplexMatrix rho = rho0.matrix();
  for (std::size_t k = 0; k < chain.steps; ++k) {
    const Instrument& inst = chain.stage(k);
    const double u = uniform_at(seed, trajectory_index,
                                static_cast<std::uint32_t>(k), 0);
    StepDraw step = draw_step(inst, rho, u, tol.eps);
    rho = step.post * cplx{1.0 / step.probability, 0.0};
    sample.outcomes.push_back(inst.space().outcome_at(step.outcome));
    sample.outcome_indices.push_back(step.outcome);
    sample.weights.push_back(step.probability);
    sample.states.emplace_back(hermitian_part(rho), Tolerance{1e-6});
  }
  return sample;
}

BatchResult sample_batch(const InstrumentChain& chain, const State& rho0,
                         std::uint64_t seed, std::uint64_t trajectories,
                         bool parallel, Tolerance tol,
                         bool record_sequences) {
  BatchResult result;
  result.trajectories = trajectories;
  std::size_t joint = 1;
  for (std::size_t k = 0; k < chain.steps; ++k) {
    const std::size_t radix = chain.stage(k).outcome_count();
    if (record_sequences && radix > 255)
      throw DimensionError("sample: sequence recording needs < 256 outcomes");
    result.radices.push_back(radix);
    joint *= radix;
  }
  result.counts.assign(joint, 0);
  if (record_sequences) result.sequences.assign(trajectories * chain.steps, 0);

  const std::int64_t n = static_cast<std::int64_t>(trajectories);
  const ComplexMatrix rho_init = rho0.matrix();

#pragma omp parallel if (parallel)
  {
    std::vector<std::uint64_t> local(joint, 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t t = 0; t < n; ++t) {
      ComplexMatrix rho = rho_init;
      std::size_t jidx = 0;
      for (std::size_t k = 0; k < chain.steps; ++k) {
        const Instrument& inst = chain.stage(k);
        const double u = uniform_at(seed, static_cast<std::uint64_t>(t),
                                    static_cast<std::uint32_t>(k), 0);
        StepDraw step = draw_step(inst, rho, u, tol.eps);
        rho = step.post * cplx{1.0 / step.probability, 0.0};
        jidx = jidx * inst.outcome_count() + step.outcome;
        if (record_sequences)
          result.sequences[static_cast<std::size_t>(t) * chain.steps + k] =
              static_cast<std::uint8_t>(step.outcome);
      }
      local[jidx] += 1;
    }
#pragma omp critical
    for (std::size_t i = 0; i < joint; ++i) result.counts[i] += local[i];
  }
  return result;
}

std::vector<double> chain_distribution(const InstrumentChain& chain,
                                       const State& rho0) {
  if (rho0.dim() != chain.stage(0).in_dim())
    throw DimensionError("chain_distribution: state dim != chain input dim");
  // Propagate every outcome path; probability of a path is the trace of its
  // final unnormalized state.
  std::vector<ComplexMatrix> paths{rho0.matrix()};
  for (std::size_t k = 0; k < chain.steps; ++k) {
    const Instrument& inst = chain.stage(k);
    std::vector<ComplexMatrix> next;
    next.reserve(paths.size() * inst.outcome_count());
    for (const ComplexMatrix& rho : paths)
      for (std::size_t x = 0; x < inst.outcome_count(); ++x)
        next.push_back(inst.operation(x).apply(rho));
    paths = std::move(next);
  }
  std::vector<double> probs;
  probs.reserve(paths.size());
  for (const ComplexMatrix& rho : paths) probs.push_back(rho.trace().real());
  return probs;
}

std::vector<Outcome> joint_outcome(const InstrumentChain& chain,
                                   std::size_t joint_index) {
  std::vector<std::size_t> digits(chain.steps);
  for (std::size_t k = chain.steps; k-- > 0;) {
    const std::size_t radix = chain.stage(k).outcome_count();
    digits[k] = joint_index % radix;
    joint_index /= radix;
  }
  std::vector<Outcome> out;
  out.reserve(chain.steps);
  for (std::size_t k = 0; k < chain.steps; ++k)
    out.push_back(chain.stage(k).space().outcome_at(digits[k]));
  return out;
}

}  // namespace qm
