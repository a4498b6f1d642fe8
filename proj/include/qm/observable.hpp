#ifndef QM_OBSERVABLE_HPP
#define QM_OBSERVABLE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qm/complex_matrix.hpp"
#include "qm/eig.hpp"
#include "qm/outcome.hpp"

namespace qm {

// Positive unit-trace operator.
class State {
 public:
  State(ComplexMatrix rho, Tolerance tol = {});
  const ComplexMatrix& matrix() const { return rho_; }
  std::size_t dim() const { return rho_.rows(); }

 private:
  ComplexMatrix rho_;
};

// Finite family of effects summing to the identity. Effects are stored in
// canonical outcome order; every constructor exit re-validates effects and
// completeness (no clamping, drift surfaces as a failure).
class Observable {
 public:
  Observable(OutcomeSpace space, std::vector<ComplexMatrix> effects,
             Tolerance tol = {});

  static Observable trivial(std::size_t dim, std::string label = "*");

  const OutcomeSpace& space() const { return space_; }
  std::size_t dim() const { return dim_; }
  std::size_t outcome_count() const { return effects_.size(); }

  const ComplexMatrix& effect(std::size_t index) const {
    return effects_[index];
  }
  const ComplexMatrix& effect(const Outcome& o) const {
    return effects_[space_.index_of(o)];
  }
  const std::vector<ComplexMatrix>& effects() const { return effects_; }

  // A(Delta) = sum of effects over a subset of outcome indices, summed in
  // ascending canonical order.
  ComplexMatrix subset_effect(const std::vector<std::size_t>& indices) const;

  bool flagged_trivial_part() const { return trivial_part_; }

 private:
  friend Observable part(const Observable&, const OutcomeMap&, Tolerance);
  OutcomeSpace space_;
  std::vector<ComplexMatrix> effects_;
  std::size_t dim_ = 0;
  bool trivial_part_ = false;
};

// Factory used by parsers: labeled effects keyed by joined outcome string.
// Collects every failed invariant into the ValidationError message.
Observable validate_observable(const OutcomeSpace& space,
                               const std::map<std::string, ComplexMatrix>& effects,
                               std::size_t dim, Tolerance tol = {});

using ProbabilityTable = std::map<Outcome, double>;

// Full outcome-probability table tr(rho A_x).
ProbabilityTable distribution(const Observable& a, const State& rho);
// Probability of an outcome subset, tr[rho A(Delta)].
double distribution(const Observable& a, const State& rho,
                    const std::vector<Outcome>& delta);

// B_y = sum{A_x : f(x) = y}; the image of a under f. One-outcome targets are
// flagged as trivial parts.
Observable part(const Observable& a, const OutcomeMap& f, Tolerance tol = {});

// i-marginal (1-based axis): sums effects over the slice x_i = y. Summation
// order matches part() with the coordinate projection exactly, so the two
// routes agree bitwise. 1-axis observables are their own marginal.
Observable marginal(const Observable& a, std::size_t axis, Tolerance tol = {});

// Tensor product; each input contributes one axis (multi-axis inputs enter
// flattened). Effects are Kronecker products in left-fold order.
Observable tensor_observables(const std::vector<Observable>& parts,
                              Tolerance tol = {});

// Reduced observable on factor i (1-based): each effect is the partial trace
// over the other factors divided by their dimension product.
Observable reduced_observable(const Observable& a, std::size_t factor,
                              const FactorDims& dims, Tolerance tol = {});

// Weights {lambda_x} when every effect is lambda_x * I within eps.
std::optional<std::map<Outcome, double>> identity_observable_check(
    const Observable& a, Tolerance tol = {});

// Nested-conjugation product A1 o ... o An with effects
// sqrt(A1_x1) ... An_xn ... sqrt(A1_x1); first marginal is parts[0].
Observable luders_sequential(const std::vector<Observable>& parts,
                             Tolerance tol = {});

// Joint observable of mutually commuting observables: products in axis order,
// Hermitian-symmetrized before validation. A commutator above eps is a
// "construction not applicable" error, not a coexistence verdict.
Observable commuting_joint(const std::vector<Observable>& parts,
                           Tolerance tol = {});

struct JointReport {
  bool pass = false;
  std::vector<double> axis_deviation;  // per axis, max entry deviation
  double max_deviation = 0.0;
  std::string detail;
};

// Checks marginal(c, i) against targets[i] per axis.
JointReport verify_joint(const Observable& c,
                         const std::vector<Observable>& targets,
                         Tolerance tol = {});

struct ProductStructureReport {
  bool pass = false;
  std::string detail;  // names a bad intersection on failure
  // h(x) = (f1(x),...,fn(x)) as canonical indices source -> product space.
  std::vector<std::size_t> bijection;
  OutcomeSpace product_space;
  double max_marginal_deviation = 0.0;
};

// The fs induce product structure iff every
// intersection of fibers is a singleton; on success returns the bijection h
// and confirms part(a, f_i) matches the i-marginal of a re-indexed by h.
ProductStructureReport verify_product_structure(const Observable& a,
                                                const std::vector<OutcomeMap>& fs,
                                                Tolerance tol = {});

}  // namespace qm

#endif
