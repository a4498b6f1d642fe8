#include <doctest.h>

#include "test_support.hpp"

using namespace qm;
using qmtest::Rng;

namespace {

ComplexMatrix proj_plus() {
  return ComplexMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}});
}
ComplexMatrix proj_minus() {
  return ComplexMatrix::from_rows({{0.5, -0.5}, {-0.5, 0.5}});
}
ComplexMatrix proj0() { return ComplexMatrix::from_rows({{1, 0}, {0, 0}}); }
ComplexMatrix proj1() { return ComplexMatrix::from_rows({{0, 0}, {0, 1}}); }

Observable plus_minus() {
  return Observable(OutcomeSpace::single_axis({"+", "-"}),
                    {proj_plus(), proj_minus()});
}
Observable computational() {
  return Observable(OutcomeSpace::single_axis({"0", "1"}),
                    {proj0(), proj1()});
}

State ket0() { return State(proj0()); }

}  // namespace

TEST_CASE("validate_observable: identity and diagonal cases") {
  const OutcomeSpace one = OutcomeSpace::single_axis({"a"});
  CHECK_NOTHROW(validate_observable(one, {{"a", ComplexMatrix::identity(3)}}, 3));

  const OutcomeSpace two = OutcomeSpace::single_axis({"0", "1"});
  CHECK_NOTHROW(validate_observable(
      two,
      {{"0", ComplexMatrix::from_rows({{0.75, 0}, {0, 0.25}})},
       {"1", ComplexMatrix::from_rows({{0.25, 0}, {0, 0.75}})}},
      2));
}

TEST_CASE("validate_observable: completeness violation reports the residual") {
  const OutcomeSpace two = OutcomeSpace::single_axis({"0", "1"});
  CHECK_THROWS_WITH_AS(
      validate_observable(
          two,
          {{"0", ComplexMatrix::from_rows({{0.9, 0}, {0, 0.9}})},
           {"1", ComplexMatrix::from_rows({{0.2, 0}, {0, 0.2}})}},
          2),
      doctest::Contains("completeness residual"), ValidationError);
}

TEST_CASE("validate_observable: bad effect names the outcome") {
  const OutcomeSpace two = OutcomeSpace::single_axis({"0", "1"});
  CHECK_THROWS_WITH_AS(
      validate_observable(
          two,
          {{"0", ComplexMatrix::from_rows({{1.5, 0}, {0, 0}})},
           {"1", ComplexMatrix::from_rows({{-0.5, 0}, {0, 1}})}},
          2),
      doctest::Contains("effect \"0\""), ValidationError);
}

TEST_CASE("outcome space: reserved delimiter and duplicate labels rejected") {
  CHECK_THROWS_AS(OutcomeSpace::single_axis({"a|b"}), ValidationError);
  CHECK_THROWS_AS(OutcomeSpace::single_axis({"x", "x"}), ValidationError);
  CHECK_THROWS_AS(OutcomeSpace(std::vector<std::vector<std::string>>{}),
                  ValidationError);
}

TEST_CASE("distribution: diagonal observable in |0><0|") {
  const Observable a(OutcomeSpace::single_axis({"0", "1"}),
                     {ComplexMatrix::from_rows({{0.75, 0}, {0, 0.25}}),
                      ComplexMatrix::from_rows({{0.25, 0}, {0, 0.75}})});
  const ProbabilityTable t = distribution(a, ket0());
  CHECK(t.at({"0"}) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(t.at({"1"}) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("distribution: full outcome set has probability 1") {
  Rng rng(201);
  const Observable a = qmtest::random_observable(rng, 3, 4);
  const State rho = qmtest::random_state(rng, 3);
  std::vector<Outcome> all;
  for (std::size_t i = 0; i < a.outcome_count(); ++i)
    all.push_back(a.space().outcome_at(i));
  CHECK(distribution(a, rho, all) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("distribution: plus/minus basis in |0><0| gives a fair coin") {
  const ProbabilityTable t = distribution(plus_minus(), ket0());
  CHECK(t.at({"+"}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.at({"-"}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("distribution: errors") {
  const Observable a = plus_minus();
  CHECK_THROWS_AS(distribution(a, State(ComplexMatrix::identity(3) *
                                        cplx{1.0 / 3.0, 0})),
                  DimensionError);
  CHECK_THROWS_AS(distribution(a, ket0(), {Outcome{"bogus"}}),
                  ValidationError);
}

TEST_CASE("part: identity map reproduces the observable") {
  Rng rng(202);
  const Observable a = qmtest::random_observable(rng, 2, 3);
  const Observable b = part(a, OutcomeMap::identity(a.space()));
  for (std::size_t i = 0; i < a.outcome_count(); ++i)
    CHECK(max_abs_diff(a.effect(i), b.effect(i)) == 0.0);
  CHECK_FALSE(b.flagged_trivial_part());
}

TEST_CASE("part: constant map gives the flagged trivial part {I}") {
  Rng rng(203);
  const Observable a = qmtest::random_observable(rng, 3, 4);
  const Observable b = part(a, OutcomeMap::constant(a.space()));
  CHECK(b.outcome_count() == 1);
  CHECK(b.flagged_trivial_part());
  CHECK(max_abs_diff(b.effect(std::size_t{0}), ComplexMatrix::identity(3)) <
        1e-9);
}

TEST_CASE("part: merging two of three outcomes sums their effects") {
  Rng rng(204);
  const Observable a = qmtest::random_observable(rng, 2, 3);
  // 0 -> keep, {1,2} -> merged
  OutcomeMap f(a.space(), OutcomeSpace::single_axis({"keep", "merged"}),
               {0, 1, 1});
  const Observable b = part(a, f);
  CHECK(b.effect(Outcome{"keep"}) == a.effect(std::size_t{0}));
  CHECK(max_abs_diff(b.effect(Outcome{"merged"}),
                     a.effect(std::size_t{1}) + a.effect(std::size_t{2})) ==
        0.0);
}

TEST_CASE("outcome map: non-surjective rejected") {
  const OutcomeSpace s = OutcomeSpace::single_axis({"a", "b"});
  CHECK_THROWS_WITH_AS(
      OutcomeMap(s, OutcomeSpace::single_axis({"x", "y"}), {0, 0}),
      doctest::Contains("surjective"), ValidationError);
}

TEST_CASE("marginal: equals part under the coordinate projection, exactly") {
  Rng rng(205);
  for (const auto& axes :
       {std::vector<std::size_t>{2, 2}, std::vector<std::size_t>{2, 3},
        std::vector<std::size_t>{2, 2, 2}}) {
    for (std::size_t dim : {2u, 3u}) {
      const Observable a = qmtest::random_multi_observable(rng, dim, axes);
      for (std::size_t i = 1; i <= axes.size(); ++i) {
        const Observable via_marginal = marginal(a, i);
        const Observable via_part =
            part(a, OutcomeMap::projection(a.space(), i - 1));
        REQUIRE(via_marginal.outcome_count() == via_part.outcome_count());
        for (std::size_t y = 0; y < via_marginal.outcome_count(); ++y)
          CHECK(via_marginal.effect(y) == via_part.effect(y));
      }
    }
  }
}

TEST_CASE("marginal: 1-axis observable is its own marginal; bad axis throws") {
  Rng rng(206);
  const Observable a = qmtest::random_observable(rng, 2, 2);
  const Observable m = marginal(a, 1);
  CHECK(m.effect(std::size_t{0}) == a.effect(std::size_t{0}));
  CHECK_THROWS_AS(marginal(a, 2), DimensionError);
  CHECK_THROWS_AS(marginal(a, 0), DimensionError);
}

TEST_CASE("tensor_observables: {I} x {I} is {I4}") {
  const Observable t =
      tensor_observables({Observable::trivial(2), Observable::trivial(2)});
  CHECK(t.outcome_count() == 1);
  CHECK(t.dim() == 4);
  CHECK(t.effect(std::size_t{0}) == ComplexMatrix::identity(4));
}

TEST_CASE("tensor_observables: marginals embed with identities") {
  Rng rng(207);
  const Observable a1 = qmtest::random_observable(rng, 2, 2);
  const Observable a2 = qmtest::random_observable(rng, 3, 3);
  const Observable t = tensor_observables({a1, a2});
  const Observable m1 = marginal(t, 1);
  const Observable m2 = marginal(t, 2);
  for (std::size_t x = 0; x < a1.outcome_count(); ++x)
    CHECK(max_abs_diff(m1.effect(x),
                       kron(a1.effect(x), ComplexMatrix::identity(3))) <
          1e-12);
  for (std::size_t x = 0; x < a2.outcome_count(); ++x)
    CHECK(max_abs_diff(m2.effect(x),
                       kron(ComplexMatrix::identity(2), a2.effect(x))) <
          1e-12);
}

TEST_CASE("tensor_observables: product state distribution factorizes") {
  Rng rng(208);
  const Observable a1 = qmtest::random_observable(rng, 2, 2);
  const Observable a2 = qmtest::random_observable(rng, 2, 3);
  const State r1 = qmtest::random_state(rng, 2);
  const State r2 = qmtest::random_state(rng, 2);
  const Observable t = tensor_observables({a1, a2});
  const State joint(kron(r1.matrix(), r2.matrix()));
  const ProbabilityTable pt = distribution(t, joint);
  const ProbabilityTable p1 = distribution(a1, r1);
  const ProbabilityTable p2 = distribution(a2, r2);
  for (const auto& [o, p] : pt) {
    const double expect = p1.at({o[0]}) * p2.at({o[1]});
    CHECK(p == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("reduced_observable: recovers tensor factors (marginal i)") {
  Rng rng(209);
  for (int it = 0; it < 10; ++it) {
    const Observable a1 = qmtest::random_observable(rng, 2, 2);
    const Observable a2 = qmtest::random_observable(rng, 3, 2);
    const Observable t = tensor_observables({a1, a2});
    const FactorDims dims{2, 3};
    const Observable r1 = reduced_observable(t, 1, dims);
    const Observable r2 = reduced_observable(t, 2, dims);
    const Observable m1 = marginal(r1, 1);
    const Observable m2 = marginal(r2, 2);
    for (std::size_t x = 0; x < a1.outcome_count(); ++x)
      CHECK(max_abs_diff(m1.effect(x), a1.effect(x)) < 1e-9);
    for (std::size_t x = 0; x < a2.outcome_count(); ++x)
      CHECK(max_abs_diff(m2.effect(x), a2.effect(x)) < 1e-9);
  }
}

TEST_CASE("reduced_observable: mixed reduced marginal is an identity observable") {
  Rng rng(210);
  const Observable a1 = qmtest::random_observable(rng, 2, 2);
  const Observable a2 = qmtest::random_observable(rng, 3, 3);
  const Observable t = tensor_observables({a1, a2});
  const Observable r1 = reduced_observable(t, 1, FactorDims{2, 3});
  const Observable mixed = marginal(r1, 2);  // axis 2 on factor 1
  const auto weights = identity_observable_check(mixed);
  REQUIRE(weights.has_value());
  for (std::size_t x = 0; x < a2.outcome_count(); ++x) {
    const double expect = a2.effect(x).trace().real() / 3.0;
    CHECK(weights->at(mixed.space().outcome_at(x)) ==
          doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("reduced_observable: single factor is the identity reduction") {
  Rng rng(211);
  const Observable a = qmtest::random_observable(rng, 3, 2);
  const Observable r = reduced_observable(a, 1, FactorDims{3});
  for (std::size_t x = 0; x < a.outcome_count(); ++x)
    CHECK(r.effect(x) == a.effect(x));
  CHECK_THROWS_AS(reduced_observable(a, 1, FactorDims{2, 2}), DimensionError);
}

TEST_CASE("identity_observable_check: scalar family yes, projectors no") {
  const Observable idobs(
      OutcomeSpace::single_axis({"0", "1"}),
      {ComplexMatrix::identity(2) * cplx{0.5, 0},
       ComplexMatrix::identity(2) * cplx{0.5, 0}});
  const auto w = identity_observable_check(idobs);
  REQUIRE(w.has_value());
  CHECK(w->at({"0"}) == doctest::Approx(0.5));
  CHECK(w->at({"1"}) == doctest::Approx(0.5));
  CHECK_FALSE(identity_observable_check(computational()).has_value());
}

TEST_CASE("luders_sequential: diagonal case multiplies entrywise") {
  const Observable a(OutcomeSpace::single_axis({"0", "1"}),
                     {ComplexMatrix::from_rows({{0.75, 0}, {0, 0.25}}),
                      ComplexMatrix::from_rows({{0.25, 0}, {0, 0.75}})});
  const Observable b(OutcomeSpace::single_axis({"x", "y"}),
                     {ComplexMatrix::from_rows({{0.4, 0}, {0, 0.6}}),
                      ComplexMatrix::from_rows({{0.6, 0}, {0, 0.4}})});
  const Observable ab = luders_sequential({a, b});
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) {
      const ComplexMatrix& ex = a.effect(x);
      const ComplexMatrix& ey = b.effect(y);
      ComplexMatrix want(2, 2);
      want.at(0, 0) = ex.at(0, 0) * ey.at(0, 0);
      want.at(1, 1) = ex.at(1, 1) * ey.at(1, 1);
      CHECK(max_abs_diff(ab.effect(Outcome{a.space().outcome_at(x)[0],
                                           b.space().outcome_at(y)[0]}),
                         want) < 1e-12);
    }
}

TEST_CASE("luders_sequential: first marginal recovers the first factor") {
  Rng rng(212);
  for (int it = 0; it < 10; ++it) {
    const Observable a = qmtest::random_observable(rng, 3, 2);
    const Observable b = qmtest::random_observable(rng, 3, 3);
    const Observable ab = luders_sequential({a, b});
    const Observable m1 = marginal(ab, 1);
    for (std::size_t x = 0; x < a.outcome_count(); ++x)
      CHECK(max_abs_diff(m1.effect(x), a.effect(x)) < 1e-9);
  }
}

TEST_CASE("luders_sequential: plus/minus then computational, frozen values") {
  const Observable ab = luders_sequential({plus_minus(), computational()});
  // sqrt(|+><+|) |0><0| sqrt(|+><+|) = |+><+| / 2
  CHECK(max_abs_diff(ab.effect(Outcome{"+", "0"}), proj_plus() * cplx{0.5, 0}) <
        1e-12);
  // Second marginal collapses to the identity observable {I/2, I/2}.
  const Observable m2 = marginal(ab, 2);
  CHECK(max_abs_diff(m2.effect(std::size_t{0}),
                     ComplexMatrix::identity(2) * cplx{0.5, 0}) < 1e-12);
  CHECK(max_abs_diff(m2.effect(std::size_t{1}),
                     ComplexMatrix::identity(2) * cplx{0.5, 0}) < 1e-12);
}

TEST_CASE("luders_sequential: three factors validate and keep marginal 1") {
  Rng rng(213);
  const Observable a = qmtest::random_observable(rng, 2, 2);
  const Observable b = qmtest::random_observable(rng, 2, 2);
  const Observable c = qmtest::random_observable(rng, 2, 2);
  const Observable abc = luders_sequential({a, b, c});
  CHECK(abc.space().axis_count() == 3);
  const Observable m1 = marginal(abc, 1);
  for (std::size_t x = 0; x < 2; ++x)
    CHECK(max_abs_diff(m1.effect(x), a.effect(x)) < 1e-9);
}

TEST_CASE("commuting_joint: diagonal parts recover as marginals") {
  Rng rng(214);
  const auto [a, b] = qmtest::random_commuting_pair(rng, 3, 2, 3);
  const Observable j = commuting_joint({a, b});
  const JointReport report = verify_joint(j, {a, b});
  CHECK(report.pass);
  CHECK(report.max_deviation <= 1e-9);
}

TEST_CASE("commuting_joint: trivial second factor") {
  Rng rng(215);
  const Observable a = qmtest::random_observable(rng, 2, 3);
  const Observable j = commuting_joint({a, Observable::trivial(2)});
  CHECK(j.outcome_count() == a.outcome_count());
  for (std::size_t x = 0; x < a.outcome_count(); ++x)
    CHECK(max_abs_diff(j.effect(x), a.effect(x)) < 1e-12);
}

TEST_CASE("commuting_joint: noncommuting parts are rejected, not judged") {
  CHECK_THROWS_WITH_AS(commuting_joint({plus_minus(), computational()}),
                       doctest::Contains("construction not applicable"),
                       ValidationError);
}

TEST_CASE("verify_joint: tensor observable against its embedded factors") {
  Rng rng(216);
  const Observable a1 = qmtest::random_observable(rng, 2, 2);
  const Observable a2 = qmtest::random_observable(rng, 2, 2);
  const Observable t = tensor_observables({a1, a2});
  std::vector<ComplexMatrix> e1, e2;
  for (std::size_t x = 0; x < 2; ++x) {
    e1.push_back(kron(a1.effect(x), ComplexMatrix::identity(2)));
    e2.push_back(kron(ComplexMatrix::identity(2), a2.effect(x)));
  }
  const Observable t1(a1.space(), e1), t2(a2.space(), e2);
  CHECK(verify_joint(t, {t1, t2}).pass);
}

TEST_CASE("verify_joint: noncommuting Luders fails on axis 2 with deviation 1/2") {
  const Observable ab = luders_sequential({plus_minus(), computational()});
  const JointReport report = verify_joint(ab, {plus_minus(), computational()});
  CHECK_FALSE(report.pass);
  CHECK(report.axis_deviation[0] <= 1e-9);
  CHECK(report.axis_deviation[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("verify_joint: label mismatch is reported, not thrown") {
  Rng rng(217);
  const Observable a = qmtest::random_multi_observable(rng, 2, {2, 2});
  const Observable wrong(OutcomeSpace::single_axis({"a", "b"}),
                         {proj0(), proj1()});
  const JointReport report = verify_joint(a, {wrong, marginal(a, 2)});
  CHECK_FALSE(report.pass);
  CHECK(report.detail.find("mismatch") != std::string::npos);
}

TEST_CASE("verify_product_structure: coordinate projections pass") {
  Rng rng(218);
  const Observable a = qmtest::random_multi_observable(rng, 2, {2, 3});
  std::vector<OutcomeMap> fs{OutcomeMap::projection(a.space(), 0),
                             OutcomeMap::projection(a.space(), 1)};
  const ProductStructureReport report = verify_product_structure(a, fs);
  CHECK(report.pass);
  for (std::size_t x = 0; x < report.bijection.size(); ++x)
    CHECK(report.bijection[x] == x);  // identity relabeling
}

TEST_CASE("verify_product_structure: flat 4-outcome grid reconstruction") {
  Rng rng(219);
  const Observable a(OutcomeSpace::single_axis({"00", "01", "10", "11"}),
                     qmtest::random_effect_partition(rng, 2, 4));
  OutcomeMap f1(a.space(), OutcomeSpace::single_axis({"0", "1"}), {0, 0, 1, 1});
  OutcomeMap f2(a.space(), OutcomeSpace::single_axis({"0", "1"}), {0, 1, 0, 1});
  const ProductStructureReport report = verify_product_structure(a, {f1, f2});
  CHECK(report.pass);
  CHECK(report.product_space.outcome_count() == 4);
  CHECK(report.bijection == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("verify_product_structure: three outcomes cannot be a 2x2 grid") {
  Rng rng(220);
  const Observable a(OutcomeSpace::single_axis({"a", "b", "c"}),
                     qmtest::random_effect_partition(rng, 2, 3));
  OutcomeMap f1(a.space(), OutcomeSpace::single_axis({"0", "1"}), {0, 0, 1});
  OutcomeMap f2(a.space(), OutcomeSpace::single_axis({"0", "1"}), {0, 1, 1});
  const ProductStructureReport report = verify_product_structure(a, {f1, f2});
  CHECK_FALSE(report.pass);
  CHECK(report.detail.find("cardinality") != std::string::npos);
}

TEST_CASE("verify_product_structure: one-outcome image violates the premise") {
  Rng rng(221);
  const Observable a = qmtest::random_observable(rng, 2, 3);
  CHECK_THROWS_WITH_AS(
      verify_product_structure(a, {OutcomeMap::constant(a.space())}),
      doctest::Contains("one-outcome image"), ValidationError);
}

TEST_CASE("marginals of a multi-observable coexist (joint = the observable)") {
  Rng rng(222);
  for (int it = 0; it < 5; ++it) {
    const Observable a = qmtest::random_multi_observable(rng, 3, {2, 2});
    CHECK(verify_joint(a, {marginal(a, 1), marginal(a, 2)}).pass);
  }
}

TEST_CASE("state validation: rejects non-PSD and wrong trace") {
  CHECK_THROWS_WITH_AS(State(ComplexMatrix::from_rows({{2, 0}, {0, -1}})),
                       doctest::Contains("not PSD"), ValidationError);
  CHECK_THROWS_WITH_AS(State(ComplexMatrix::identity(2)),
                       doctest::Contains("trace"), ValidationError);
}

TEST_CASE("subset effects are effects for random outcome subsets") {
  Rng rng(223);
  for (int it = 0; it < 10; ++it) {
    const Observable a = qmtest::random_observable(rng, 3, 4);
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < a.outcome_count(); ++i)
      if (rng() % 2) subset.push_back(i);
    CHECK(validate_effect(a.subset_effect(subset)).ok);
  }
}
