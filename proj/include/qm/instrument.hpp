#ifndef QM_INSTRUMENT_HPP
#define QM_INSTRUMENT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qm/observable.hpp"

namespace qm {

// Completely positive trace-non-increasing map, stored exclusively as a
// Kraus list (CP holds by construction). Kraus lists are never compressed;
// equality of operations is extensional via apply on the matrix-unit basis.
class Operation {
 public:
  Operation(std::size_t in_dim, std::size_t out_dim,
            std::vector<ComplexMatrix> kraus, Tolerance tol = {});

  static Operation identity_channel(std::size_t dim) {
    return Operation(dim, dim, {ComplexMatrix::identity(dim)});
  }

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }

  // Sum_i K_i b K_i†.
  ComplexMatrix apply(const ComplexMatrix& b) const;
  // Sum_i K_i† c K_i; adjoint w.r.t. the trace pairing, maps effects to
  // effects.
  ComplexMatrix dual_apply(const ComplexMatrix& c) const;

  // Sum_i K_i† K_i (the measured effect when applied to the identity).
  ComplexMatrix gram() const;

  bool is_channel(Tolerance tol = {}) const;

  // Union of Kraus families = sum of the operations.
  friend Operation operation_sum(const std::vector<Operation>& ops);

 private:
  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  std::vector<ComplexMatrix> kraus_;
};

Operation operation_sum(const std::vector<Operation>& ops);

// Max deviation of apply(a, .) vs apply(b, .) over the matrix-unit basis
// E_kl of the input space; the basis spans L(H), so agreement there is
// agreement everywhere.
double operation_deviation(const Operation& a, const Operation& b);

// Finite family of operations summing to a channel. Operations are stored
// in canonical outcome order; out_factors optionally annotates the output
// space with tensor-factor dims (needed for reductions and joint checks).
class Instrument {
 public:
  Instrument(OutcomeSpace space, std::vector<Operation> operations,
             std::optional<FactorDims> out_factors = std::nullopt,
             Tolerance tol = {});

  const OutcomeSpace& space() const { return space_; }
  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  std::size_t outcome_count() const { return operations_.size(); }
  const std::optional<FactorDims>& out_factors() const { return out_factors_; }

  const Operation& operation(std::size_t index) const {
    return operations_[index];
  }
  const Operation& operation(const Outcome& o) const {
    return operations_[space_.index_of(o)];
  }
  const std::vector<Operation>& operations() const { return operations_; }

  // The channel I-bar = sum of all operations (concatenated Kraus lists).
  Operation total() const;

 private:
  OutcomeSpace space_;
  std::vector<Operation> operations_;
  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  std::optional<FactorDims> out_factors_;
};

// Factory used by parsers: labeled Kraus lists keyed by joined outcome
// string; reports the channel residual on failure.
Instrument validate_instrument(const OutcomeSpace& space,
                               const std::map<std::string, std::vector<ComplexMatrix>>& ops,
                               std::size_t in_dim, std::size_t out_dim,
                               std::optional<FactorDims> out_factors = std::nullopt,
                               Tolerance tol = {});

// The unique observable with tr(rho A_x) = tr[I_x(rho)]: effects
// dual_apply(I_x, I).
Observable measured_observable(const Instrument& i, Tolerance tol = {});

// tr[I_x(rho)] per outcome (equals the measured observable's distribution).
ProbabilityTable instrument_distribution(const Instrument& i, const State& rho);
double instrument_distribution(const Instrument& i, const State& rho,
                               const std::vector<Outcome>& delta);

// i-marginal (1-based axis): Kraus concatenation over the slice x_axis = y.
Instrument instrument_marginal(const Instrument& i, std::size_t axis,
                               Tolerance tol = {});

// Reduction onto one output factor: each operation is composed with the
// partial trace over the other factors, realized as Kraus operators
// <e_t| on the traced factors so everything stays in Kraus form.
Instrument reduced_instrument(const Instrument& i, std::size_t factor,
                              const FactorDims& out_dims, Tolerance tol = {});

// J_y = I[f^-1(y)]: Kraus concatenation over fibers.
Instrument instrument_part(const Instrument& i, const OutcomeMap& f,
                           Tolerance tol = {});

// Kraus operators sqrt(A_x); measures a.
Instrument construct_luders(const Observable& a, Tolerance tol = {});

// rho -> tr(rho A_x) alpha_x realized in Kraus form via eigenfactorizations
// sqrt(lambda_u mu_v) |u><v|; eigenvalues below eps are dropped.
Instrument construct_holevo(const Observable& a,
                            const std::map<std::string, State>& alphas,
                            Tolerance tol = {});

// One or more Kraus operators per outcome with Sum K†K = I.
Instrument construct_kraus(const OutcomeSpace& space,
                           const std::vector<std::vector<ComplexMatrix>>& kraus_by_outcome,
                           std::size_t in_dim, std::size_t out_dim,
                           Tolerance tol = {});

// Tensor product: per-tuple Kraus lists are all Kronecker combinations; the
// output space carries the factor annotation (out_1,...,out_n).
Instrument tensor_instruments(const std::vector<Instrument>& parts,
                              Tolerance tol = {});

// Sequential product: out_dim of part k feeds in_dim of part k+1; per-tuple
// Kraus lists are all ordered products (last ... first).
Instrument sequential_instruments(const std::vector<Instrument>& parts,
                                  Tolerance tol = {});

// Bi-observable (A[I]B)_xy = I_x†(B_y); requires i to measure a within eps.
Observable seq_product_observables(const Observable& a, const Instrument& i,
                                   const Observable& b, Tolerance tol = {});

// (B|I|A)_y = sum_x I_x†(B_y), the second marginal of A[I]B.
Observable conditioned_observable(const Observable& b, const Instrument& i,
                                  const Observable& a, Tolerance tol = {});

struct JointInstrumentReport {
  bool pass = false;
  // Per target: extensional deviation of the reduced marginal from the
  // target over the matrix-unit probe basis.
  std::vector<double> target_deviation;
  // Per target: deviation of the measured-joint marginal from the target's
  // measured observable.
  std::vector<double> measured_marginal_deviation;
  double max_deviation = 0.0;
  std::string detail;
};

// Coexistence witness check: reduced marginals of j against targets, plus
// the implied coexistence of the measured observables.
JointInstrumentReport verify_joint_instrument(const Instrument& j,
                                              const std::vector<Instrument>& targets,
                                              Tolerance tol = {});

}  // namespace qm

#endif
