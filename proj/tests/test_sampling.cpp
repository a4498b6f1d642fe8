#include <doctest.h>

#include "qm/sampling.hpp"
#include "test_support.hpp"

using namespace qm;
using qmtest::Rng;

namespace {

Instrument luders_computational() {
  return construct_luders(
      Observable(OutcomeSpace::single_axis({"0", "1"}),
                 {ComplexMatrix::from_rows({{1, 0}, {0, 0}}),
                  ComplexMatrix::from_rows({{0, 0}, {0, 1}})}));
}

State plus_state() {
  return State(ComplexMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
}

}  // namespace

TEST_CASE("philox4x32-10: reference known-answer vectors") {
  // Counter/key all zero.
  const auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du,
                                             0xbc57ac4cu, 0x9b00dbd8u});
  // Counter/key all ones.
  const auto ones = Philox4x32::block(
      {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
      {0xffffffffu, 0xffffffffu});
  CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu,
                                             0xa20bc7c6u, 0x6d5451fdu});
  // Digits of pi as counter and key.
  const auto pi = Philox4x32::block(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
      {0xa4093822u, 0x299f31d0u});
  CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu,
                                           0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniform_at: range, determinism, stream separation") {
  for (std::uint64_t t = 0; t < 100; ++t) {
    const double u = uniform_at(42, t, 0, 0);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(uniform_at(42, t, 0, 0) == u);
  }
  CHECK(uniform_at(1, 0, 0, 0) != uniform_at(2, 0, 0, 0));
  CHECK(uniform_at(1, 0, 0, 0) != uniform_at(1, 1, 0, 0));
  CHECK(uniform_at(1, 0, 0, 0) != uniform_at(1, 0, 1, 0));
}

TEST_CASE("sample_trajectory: identity chain repeats one outcome, state constant") {
  const Instrument id(OutcomeSpace::single_axis({"*"}),
                      {Operation::identity_channel(2)});
  Rng rng(400);
  const State rho0 = qmtest::random_state(rng, 2);
  const InstrumentChain chain({id, id, id});
  const TrajectorySample s = sample_trajectory(chain, rho0, 7);
  REQUIRE(s.outcomes.size() == 3);
  for (const Outcome& o : s.outcomes) CHECK(o == Outcome{"*"});
  for (const State& st : s.states)
    CHECK(max_abs_diff(st.matrix(), rho0.matrix()) < 1e-9);
  for (double w : s.weights) CHECK(w == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sample_trajectory: weights equal the analytic per-step distribution") {
  Rng rng(401);
  const Instrument k = qmtest::random_kraus_instrument(rng, 2, 2, 2);
  const State rho0 = qmtest::random_state(rng, 2);
  const InstrumentChain chain({k, k});
  for (std::uint64_t t = 0; t < 20; ++t) {
    const TrajectorySample s = sample_trajectory(chain, rho0, 11, t);
    // Step 0 weight must be exactly the analytic probability of the drawn
    // outcome (same arithmetic on both sides).
    const ProbabilityTable table = instrument_distribution(k, rho0);
    CHECK(s.weights[0] == table.at(s.outcomes[0]));
    // Post state is the normalized update.
    const ComplexMatrix want =
        k.operation(s.outcome_indices[0]).apply(rho0.matrix()) *
        cplx{1.0 / s.weights[0], 0.0};
    CHECK(max_abs_diff(s.states[0].matrix(), hermitian_part(want)) < 1e-12);
  }
}

TEST_CASE("sample_batch: projective Luders on |+> is a fair coin (3 sigma)") {
  const InstrumentChain chain({luders_computational()});
  const std::uint64_t n = 20000;
  const BatchResult batch = sample_batch(chain, plus_state(), 5, n);
  REQUIRE(batch.counts.size() == 2);
  CHECK(batch.counts[0] + batch.counts[1] == n);
  const double freq0 = static_cast<double>(batch.counts[0]) / n;
  const double sigma = std::sqrt(0.25 / n);
  CHECK(std::abs(freq0 - 0.5) < 3.0 * sigma);
}

TEST_CASE("sample_batch: parallel and serial counts are identical") {
  Rng rng(402);
  const Instrument k = qmtest::random_kraus_instrument(rng, 2, 2, 3);
  const State rho0 = qmtest::random_state(rng, 2);
  const InstrumentChain chain({k, k});
  const BatchResult par = sample_batch(chain, rho0, 9, 5000, true);
  const BatchResult ser = sample_batch(chain, rho0, 9, 5000, false);
  CHECK(par.counts == ser.counts);
}

TEST_CASE("sample_batch: repeated runs are byte-identical") {
  const InstrumentChain chain({luders_computational(), luders_computational()});
  const BatchResult a = sample_batch(chain, plus_state(), 123, 2000);
  const BatchResult b = sample_batch(chain, plus_state(), 123, 2000);
  CHECK(a.counts == b.counts);
  // Trajectory streams replay identically too.
  for (std::uint64_t t = 0; t < 50; ++t) {
    const TrajectorySample s1 = sample_trajectory(chain, plus_state(), 123, t);
    const TrajectorySample s2 = sample_trajectory(chain, plus_state(), 123, t);
    CHECK(s1.outcome_indices == s2.outcome_indices);
  }
}

TEST_CASE("chain_distribution: matches the sequential-product distribution") {
  Rng rng(403);
  const Instrument k1 = qmtest::random_kraus_instrument(rng, 2, 3, 2);
  const Instrument k2 = qmtest::random_kraus_instrument(rng, 3, 2, 3);
  const State rho0 = qmtest::random_state(rng, 2);
  const InstrumentChain chain({k1, k2});
  const std::vector<double> probs = chain_distribution(chain, rho0);

  const Instrument seq = sequential_instruments({k1, k2});
  const ProbabilityTable table = instrument_distribution(seq, rho0);
  REQUIRE(probs.size() == table.size());
  std::size_t i = 0;
  for (std::size_t x = 0; x < k1.outcome_count(); ++x)
    for (std::size_t y = 0; y < k2.outcome_count(); ++y) {
      const Outcome o{k1.space().outcome_at(x)[0], k2.space().outcome_at(y)[0]};
      CHECK(probs[i] == doctest::Approx(table.at(o)).epsilon(1e-10));
      ++i;
    }
  double total = 0.0;
  for (double p : probs) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sample_batch: Holevo chain frequencies match the analytic joint (4 sigma)") {
  Rng rng(404);
  const Observable a = qmtest::random_observable(rng, 2, 2);
  const Observable b = qmtest::random_observable(rng, 2, 2);
  std::map<std::string, State> alphas, betas;
  for (std::size_t x = 0; x < 2; ++x) {
    alphas.emplace(join_outcome(a.space().outcome_at(x)),
                   qmtest::random_state(rng, 2));
    betas.emplace(join_outcome(b.space().outcome_at(x)),
                  qmtest::random_state(rng, 2));
  }
  const Instrument h1 = construct_holevo(a, alphas);
  const Instrument h2 = construct_holevo(b, betas);
  const State rho0 = qmtest::random_state(rng, 2);

  const InstrumentChain chain({h1, h2});
  const std::uint64_t n = 40000;
  const BatchResult batch = sample_batch(chain, rho0, 77, n);
  const std::vector<double> analytic = chain_distribution(chain, rho0);
  for (std::size_t i = 0; i < batch.counts.size(); ++i) {
    const double freq = static_cast<double>(batch.counts[i]) / n;
    const double sigma = std::sqrt(analytic[i] * (1.0 - analytic[i]) / n);
    CHECK(std::abs(freq - analytic[i]) <= 4.0 * sigma + 1.0 / n);
  }
}

TEST_CASE("instrument chain: dim mismatches rejected, cycling allowed") {
  Rng rng(405);
  const Instrument k23 = qmtest::random_kraus_instrument(rng, 2, 3, 2);
  const Instrument k32 = qmtest::random_kraus_instrument(rng, 3, 2, 2);
  CHECK_THROWS_AS(InstrumentChain({k23, k23}), DimensionError);
  // 4-step cycle through 2 -> 3 -> 2 -> 3 -> 2.
  const InstrumentChain cyc({k23, k32}, 4);
  const State rho0 = qmtest::random_state(rng, 2);
  const TrajectorySample s = sample_trajectory(cyc, rho0, 3);
  CHECK(s.outcomes.size() == 4);
  // A cycle that does not close is rejected once steps wrap.
  CHECK_THROWS_AS(InstrumentChain({k23}, 2), DimensionError);
}

TEST_CASE("sampling: zero-probability outcomes are never drawn") {
  // Projective instrument measured on an eigenstate: the other outcome has
  // probability exactly 0 and must never appear.
  const Instrument lz = luders_computational();
  const State ket0(ComplexMatrix::from_rows({{1, 0}, {0, 0}}));
  const InstrumentChain chain({lz, lz, lz});
  const BatchResult batch =
      sample_batch(chain, ket0, 31, 2000, true, Tolerance{}, true);
  CHECK(batch.counts[0] == 2000);  // all-"0" joint outcome
  for (std::uint8_t b : batch.sequences) CHECK(b == 0);
}
