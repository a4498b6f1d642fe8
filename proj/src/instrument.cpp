#include "qm/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qm {

Operation::Operation(std::size_t in_dim, std::size_t out_dim,
                     std::vector<ComplexMatrix> kraus, Tolerance tol)
    : in_dim_(in_dim), out_dim_(out_dim), kraus_(std::move(kraus)) {
  if (in_dim_ == 0 || out_dim_ == 0)
    throw DimensionError("operation: zero dimension");
  if (kraus_.empty()) throw ValidationError("operation: empty Kraus list");
  for (const ComplexMatrix& k : kraus_) {
    if (k.rows() != out_dim_ || k.cols() != in_dim_)
      throw DimensionError("operation: Kraus operator shape != out_dim x in_dim");
    if (!k.all_finite())
      throw ValidationError("operation: non-finite Kraus entry");
  }
  // Trace non-increasing: Sum K†K <= I, checked by min eigenvalue of the gap.
  const ComplexMatrix gap = ComplexMatrix::identity(in_dim_) - gram();
  const double lo = min_eigenvalue(hermitian_part(gap), tol.eps);
  if (lo < -tol.eps) {
    std::ostringstream os;
    os << "operation: trace increasing; min eig of (I - Sum K*K) = " << lo;
    throw ValidationError(os.str());
  }
}

ComplexMatrix Operation::apply(const ComplexMatrix& b) const {
  if (b.rows() != in_dim_ || b.cols() != in_dim_)
    throw DimensionError("apply: argument is not in_dim x in_dim");
  ComplexMatrix out(out_dim_, out_dim_);
  for (const ComplexMatrix& k : kraus_) out += k * b * k.adjoint();
  return out;
}

ComplexMatrix Operation::dual_apply(const ComplexMatrix& c) const {
  if (c.rows() != out_dim_ || c.cols() != out_dim_)
    throw DimensionError("dual_apply: argument is not out_dim x out_dim");
  ComplexMatrix out(in_dim_, in_dim_);
  for (const ComplexMatrix& k : kraus_) out += k.adjoint() * c * k;
  return out;
}

ComplexMatrix Operation::gram() const {
  ComplexMatrix g(in_dim_, in_dim_);
  for (const ComplexMatrix& k : kraus_) g += k.adjoint() * k;
  return g;
}

bool Operation::is_channel(Tolerance tol) const {
  return max_abs_diff(gram(), ComplexMatrix::identity(in_dim_)) <= tol.eps;
}

Operation operation_sum(const std::vector<Operation>& ops) {
  if (ops.empty()) throw ValidationError("operation_sum: empty list");
  std::vector<ComplexMatrix> all;
  for (const Operation& op : ops) {
    if (op.in_dim() != ops.front().in_dim() ||
        op.out_dim() != ops.front().out_dim())
      throw DimensionError("operation_sum: mixed dimensions");
    all.insert(all.end(), op.kraus().begin(), op.kraus().end());
  }
  return Operation(ops.front().in_dim(), ops.front().out_dim(), std::move(all));
}

double operation_deviation(const Operation& a, const Operation& b) {
  if (a.in_dim() != b.in_dim() || a.out_dim() != b.out_dim())
    throw DimensionError("operation_deviation: mixed dimensions");
  const std::size_t d = a.in_dim();
  double dev = 0.0;
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t l = 0; l < d; ++l) {
      ComplexMatrix unit(d, d);
      unit.at(k, l) = 1.0;
      dev = std::max(dev, max_abs_diff(a.apply(unit), b.apply(unit)));
    }
  return dev;
}

Instrument::Instrument(OutcomeSpace space, std::vector<Operation> operations,
                       std::optional<FactorDims> out_factors, Tolerance tol)
    : space_(std::move(space)),
      operations_(std::move(operations)),
      out_factors_(std::move(out_factors)) {
  if (operations_.size() != space_.outcome_count())
    throw ValidationError("instrument: operation count " +
                          std::to_string(operations_.size()) +
                          " != outcome count " +
                          std::to_string(space_.outcome_count()));
  in_dim_ = operations_.front().in_dim();
  out_dim_ = operations_.front().out_dim();
  for (const Operation& op : operations_)
    if (op.in_dim() != in_dim_ || op.out_dim() != out_dim_)
      throw DimensionError("instrument: operations with mixed dimensions");
  if (out_factors_ && out_factors_->product() != out_dim_)
    throw DimensionError("instrument: out_factors product != out_dim");

  ComplexMatrix g(in_dim_, in_dim_);
  for (const Operation& op : operations_) g += op.gram();
  const double residual =
      max_abs_diff(g, ComplexMatrix::identity(in_dim_));
  if (residual > tol.eps) {
    std::ostringstream os;
    os << "instrument: total operation is not a channel; residual "
       << residual << " > " << tol.eps;
    throw ValidationError(os.str());
  }
}

Operation Instrument::total() const { return operation_sum(operations_); }

Instrument validate_instrument(
    const OutcomeSpace& space,
    const std::map<std::string, std::vector<ComplexMatrix>>& ops,
    std::size_t in_dim, std::size_t out_dim,
    std::optional<FactorDims> out_factors, Tolerance tol) {
  std::vector<std::vector<ComplexMatrix>> ordered(space.outcome_count());
  std::vector<bool> present(space.outcome_count(), false);
  for (const auto& [key, kraus] : ops) {
    const Outcome o = split_outcome(key, space.axis_count());
    const std::size_t idx = space.index_of(o);
    if (present[idx])
      throw ValidationError("instrument: duplicate operation for \"" + key +
                            "\"");
    present[idx] = true;
    ordered[idx] = kraus;
  }
  for (std::size_t i = 0; i < present.size(); ++i)
    if (!present[i])
      throw ValidationError("instrument: missing operation for \"" +
                            join_outcome(space.outcome_at(i)) + "\"");
  std::vector<Operation> operations;
  operations.reserve(ordered.size());
  for (auto& kraus : ordered)
    operations.emplace_back(in_dim, out_dim, std::move(kraus), tol);
  return Instrument(space, std::move(operations), std::move(out_factors), tol);
}

Observable measured_observable(const Instrument& i, Tolerance tol) {
  std::vector<ComplexMatrix> effects;
  effects.reserve(i.outcome_count());
  const ComplexMatrix id = ComplexMatrix::identity(i.out_dim());
  for (std::size_t x = 0; x < i.outcome_count(); ++x)
    effects.push_back(hermitian_part(i.operation(x).dual_apply(id)));
  return Observable(i.space(), std::move(effects), tol);
}

ProbabilityTable instrument_distribution(const Instrument& i,
                                         const State& rho) {
  if (rho.dim() != i.in_dim())
    throw DimensionError("instrument_distribution: state dim != in_dim");
  ProbabilityTable table;
  for (std::size_t x = 0; x < i.outcome_count(); ++x)
    table[i.space().outcome_at(x)] =
        i.operation(x).apply(rho.matrix()).trace().real();
  return table;
}

double instrument_distribution(const Instrument& i, const State& rho,
                               const std::vector<Outcome>& delta) {
  if (rho.dim() != i.in_dim())
    throw DimensionError("instrument_distribution: state dim != in_dim");
  std::vector<std::size_t> indices;
  indices.reserve(delta.size());
  for (const Outcome& o : delta) indices.push_back(i.space().index_of(o));
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  double p = 0.0;
  for (std::size_t x : indices)
    p += i.operation(x).apply(rho.matrix()).trace().real();
  return p;
}

Instrument instrument_marginal(const Instrument& i, std::size_t axis,
                               Tolerance tol) {
  if (axis == 0 || axis > i.space().axis_count())
    throw DimensionError("instrument_marginal: axis out of range");
  if (i.space().axis_count() == 1) return i;
  const std::size_t ax = axis - 1;
  const OutcomeSpace target = OutcomeSpace::single_axis(i.space().axis(ax));
  std::vector<Operation> ops;
  ops.reserve(target.outcome_count());
  for (const std::string& label : i.space().axis(ax)) {
    std::vector<Operation> in_slice;
    for (std::size_t x : i.space().slice(ax, label))
      in_slice.push_back(i.operation(x));
    ops.push_back(operation_sum(in_slice));
  }
  return Instrument(target, std::move(ops), i.out_factors(), tol);
}

Instrument reduced_instrument(const Instrument& i, std::size_t factor,
                              const FactorDims& out_dims, Tolerance tol) {
  if (factor == 0 || factor > out_dims.count())
    throw DimensionError("reduced_instrument: factor out of range");
  if (out_dims.product() != i.out_dim())
    throw DimensionError("reduced_instrument: out_dims product != out_dim");
  if (out_dims.count() == 1) return i;

  const std::size_t kept = factor - 1;
  const std::size_t kept_dim = out_dims.dims[kept];

  // Kraus operators of the partial trace: T_t = <e_t| on each traced factor,
  // identity on the kept one, enumerated in canonical traced order.
  std::vector<ComplexMatrix> tracers;
  {
    std::vector<std::size_t> traced;
    for (std::size_t f = 0; f < out_dims.count(); ++f)
      if (f != kept) traced.push_back(f);
    std::size_t combos = 1;
    for (std::size_t f : traced) combos *= out_dims.dims[f];
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t rem = c;
      std::vector<std::size_t> sub(traced.size());
      for (std::size_t j = traced.size(); j-- > 0;) {
        sub[j] = rem % out_dims.dims[traced[j]];
        rem /= out_dims.dims[traced[j]];
      }
      ComplexMatrix t(kept_dim, i.out_dim());
      for (std::size_t r = 0; r < kept_dim; ++r) {
        std::size_t col = 0;
        std::size_t ti = 0;
        for (std::size_t f = 0; f < out_dims.count(); ++f) {
          const std::size_t digit = (f == kept) ? r : sub[ti++];
          col = col * out_dims.dims[f] + digit;
        }
        t.at(r, col) = 1.0;
      }
      tracers.push_back(std::move(t));
    }
  }

  std::vector<Operation> ops;
  ops.reserve(i.outcome_count());
  for (std::size_t x = 0; x < i.outcome_count(); ++x) {
    std::vector<ComplexMatrix> kraus;
    kraus.reserve(tracers.size() * i.operation(x).kraus().size());
    for (const ComplexMatrix& t : tracers)
      for (const ComplexMatrix& k : i.operation(x).kraus())
        kraus.push_back(t * k);
    ops.emplace_back(i.in_dim(), kept_dim, std::move(kraus), tol);
  }
  return Instrument(i.space(), std::move(ops), std::nullopt, tol);
}

Instrument instrument_part(const Instrument& i, const OutcomeMap& f,
                           Tolerance tol) {
  if (!(f.source() == i.space()))
    throw ValidationError("instrument_part: map source != outcome space");
  std::vector<Operation> ops;
  ops.reserve(f.target().outcome_count());
  for (std::size_t y = 0; y < f.target().outcome_count(); ++y) {
    std::vector<Operation> in_fiber;
    for (std::size_t x : f.fiber(y)) in_fiber.push_back(i.operation(x));
    ops.push_back(operation_sum(in_fiber));
  }
  return Instrument(f.target(), std::move(ops), i.out_factors(), tol);
}

Instrument construct_luders(const Observable& a, Tolerance tol) {
  std::vector<Operation> ops;
  ops.reserve(a.outcome_count());
  for (std::size_t x = 0; x < a.outcome_count(); ++x)
    ops.emplace_back(a.dim(), a.dim(),
                     std::vector<ComplexMatrix>{psd_sqrt(a.effect(x), tol.eps)},
                     tol);
  return Instrument(a.space(), std::move(ops), std::nullopt, tol);
}

Instrument construct_holevo(const Observable& a,
                            const std::map<std::string, State>& alphas,
                            Tolerance tol) {
  if (alphas.size() != a.outcome_count())
    throw ValidationError("construct_holevo: alphas must be keyed exactly by "
                          "the observable's outcomes");
  std::size_t out_dim = 0;
  std::vector<const State*> ordered(a.outcome_count(), nullptr);
  for (const auto& [key, st] : alphas) {
    const Outcome o = split_outcome(key, a.space().axis_count());
    ordered[a.space().index_of(o)] = &st;
    if (out_dim == 0) out_dim = st.dim();
    if (st.dim() != out_dim)
      throw DimensionError("construct_holevo: alphas on mixed dimensions");
  }
  for (const State* st : ordered)
    if (!st)
      throw ValidationError("construct_holevo: missing alpha for an outcome");

  std::vector<Operation> ops;
  ops.reserve(a.outcome_count());
  for (std::size_t x = 0; x < a.outcome_count(); ++x) {
    const HermitianEig ea = eig_hermitian(a.effect(x), tol.eps);
    const HermitianEig es = eig_hermitian(ordered[x]->matrix(), tol.eps);
    std::vector<ComplexMatrix> kraus;
    for (std::size_t u = 0; u < es.values.size(); ++u) {
      if (es.values[u] < tol.eps) continue;  // rank deflation
      for (std::size_t v = 0; v < ea.values.size(); ++v) {
        if (ea.values[v] < tol.eps) continue;
        const double w = std::sqrt(es.values[u] * ea.values[v]);
        ComplexMatrix k(out_dim, a.dim());
        for (std::size_t r = 0; r < out_dim; ++r)
          for (std::size_t c = 0; c < a.dim(); ++c)
            k.at(r, c) = w * es.vectors.at(r, u) *
                         std::conj(ea.vectors.at(c, v));
        kraus.push_back(std::move(k));
      }
    }
    if (kraus.empty())
      // Zero effect: contribute the zero operation as a single zero Kraus op.
      kraus.push_back(ComplexMatrix(out_dim, a.dim()));
    ops.emplace_back(a.dim(), out_dim, std::move(kraus), tol);
  }
  return Instrument(a.space(), std::move(ops), std::nullopt, tol);
}

Instrument construct_kraus(
    const OutcomeSpace& space,
    const std::vector<std::vector<ComplexMatrix>>& kraus_by_outcome,
    std::size_t in_dim, std::size_t out_dim, Tolerance tol) {
  std::vector<Operation> ops;
  ops.reserve(kraus_by_outcome.size());
  for (const auto& kraus : kraus_by_outcome)
    ops.emplace_back(in_dim, out_dim, kraus, tol);
  return Instrument(space, std::move(ops), std::nullopt, tol);
}

namespace {

std::vector<std::string> factor_labels(const OutcomeSpace& s) {
  if (s.axis_count() == 1) return s.axis(0);
  return s.flattened_labels();
}

// Decompose a canonical product index into per-part outcome indices.
std::vector<std::size_t> unmix(std::size_t idx,
                               const std::vector<Instrument>& parts) {
  std::vector<std::size_t> sub(parts.size());
  for (std::size_t i = parts.size(); i-- > 0;) {
    sub[i] = idx % parts[i].outcome_count();
    idx /= parts[i].outcome_count();
  }
  return sub;
}

}  // namespace

Instrument tensor_instruments(const std::vector<Instrument>& parts,
                              Tolerance tol) {
  if (parts.size() < 2)
    throw ValidationError("tensor_instruments: need at least 2 parts");
  std::vector<std::vector<std::string>> axes;
  std::vector<std::size_t> out_dims;
  std::size_t in_dim = 1, out_dim = 1;
  for (const Instrument& p : parts) {
    axes.push_back(factor_labels(p.space()));
    out_dims.push_back(p.out_dim());
    in_dim *= p.in_dim();
    out_dim *= p.out_dim();
  }
  OutcomeSpace space(std::move(axes));

  std::vector<Operation> ops;
  ops.reserve(space.outcome_count());
  for (std::size_t idx = 0; idx < space.outcome_count(); ++idx) {
    const std::vector<std::size_t> sub = unmix(idx, parts);
    // All Kronecker combinations of the component Kraus lists, leftmost
    // factor most significant.
    std::vector<ComplexMatrix> kraus{ComplexMatrix::identity(1)};
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::vector<ComplexMatrix> next;
      next.reserve(kraus.size() *
                   parts[i].operation(sub[i]).kraus().size());
      for (const ComplexMatrix& acc : kraus)
        for (const ComplexMatrix& k : parts[i].operation(sub[i]).kraus())
          next.push_back(kron(acc, k));
      kraus = std::move(next);
    }
    ops.emplace_back(in_dim, out_dim, std::move(kraus), tol);
  }
  return Instrument(std::move(space), std::move(ops),
                    FactorDims(std::move(out_dims)), tol);
}

Instrument sequential_instruments(const std::vector<Instrument>& parts,
                                  Tolerance tol) {
  if (parts.size() < 2)
    throw ValidationError("sequential_instruments: need at least 2 parts");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i)
    if (parts[i].out_dim() != parts[i + 1].in_dim())
      throw DimensionError("sequential_instruments: dim chain mismatch at stage " +
                           std::to_string(i + 1));

  std::vector<std::vector<std::string>> axes;
  for (const Instrument& p : parts) axes.push_back(factor_labels(p.space()));
  OutcomeSpace space(std::move(axes));

  std::vector<Operation> ops;
  ops.reserve(space.outcome_count());
  for (std::size_t idx = 0; idx < space.outcome_count(); ++idx) {
    const std::vector<std::size_t> sub = unmix(idx, parts);
    // Ordered products K^n ... K^1 over all per-stage choices.
    std::vector<ComplexMatrix> kraus = parts[0].operation(sub[0]).kraus();
    for (std::size_t i = 1; i < parts.size(); ++i) {
      std::vector<ComplexMatrix> next;
      next.reserve(kraus.size() * parts[i].operation(sub[i]).kraus().size());
      for (const ComplexMatrix& acc : kraus)
        for (const ComplexMatrix& k : parts[i].operation(sub[i]).kraus())
          next.push_back(k * acc);
      kraus = std::move(next);
    }
    ops.emplace_back(parts.front().in_dim(), parts.back().out_dim(),
                     std::move(kraus), tol);
  }
  return Instrument(std::move(space), std::move(ops), std::nullopt, tol);
}

Observable seq_product_observables(const Observable& a, const Instrument& i,
                                   const Observable& b, Tolerance tol) {
  if (i.in_dim() != a.dim())
    throw DimensionError("seq_product: instrument input dim != dim of a");
  if (i.out_dim() != b.dim())
    throw DimensionError("seq_product: instrument output dim != dim of b");
  const Observable measured = measured_observable(i, tol);
  if (!(measured.space() == a.space()))
    throw ValidationError("seq_product: instrument outcome space != a's");
  double dev = 0.0;
  for (std::size_t x = 0; x < a.outcome_count(); ++x)
    dev = std::max(dev, max_abs_diff(measured.effect(x), a.effect(x)));
  if (dev > tol.eps) {
    std::ostringstream os;
    os << "seq_product: instrument does not measure a; deviation " << dev;
    throw ValidationError(os.str());
  }

  std::vector<std::vector<std::string>> axes{factor_labels(a.space()),
                                             factor_labels(b.space())};
  OutcomeSpace space(std::move(axes));
  std::vector<ComplexMatrix> effects;
  effects.reserve(space.outcome_count());
  for (std::size_t x = 0; x < a.outcome_count(); ++x)
    for (std::size_t y = 0; y < b.outcome_count(); ++y)
      effects.push_back(
          hermitian_part(i.operation(x).dual_apply(b.effect(y))));
  return Observable(std::move(space), std::move(effects), tol);
}

Observable conditioned_observable(const Observable& b, const Instrument& i,
                                  const Observable& a, Tolerance tol) {
  return marginal(seq_product_observables(a, i, b, tol), 2, tol);
}

JointInstrumentReport verify_joint_instrument(
    const Instrument& j, const std::vector<Instrument>& targets,
    Tolerance tol) {
  JointInstrumentReport report;
  if (!j.out_factors()) {
    report.detail = "joint instrument lacks out_factors annotation";
    return report;
  }
  const FactorDims& factors = *j.out_factors();
  if (factors.count() != targets.size() ||
      j.space().axis_count() != targets.size()) {
    report.detail = "axis/factor count != target count";
    return report;
  }
  // Intermediate marginals/reductions are built without re-validation: the
  // verifier quantifies deviations, it must not abort on the imperfection it
  // is measuring.
  const Tolerance unchecked{std::numeric_limits<double>::infinity()};
  std::ostringstream detail;
  const Observable j_hat = measured_observable(j, unchecked);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Instrument& t = targets[i];
    if (t.in_dim() != j.in_dim() || t.out_dim() != factors.dims[i] ||
        factor_labels(t.space()) != j.space().axis(i)) {
      report.detail = "target " + std::to_string(i + 1) +
                      ": structural mismatch (dims or labels)";
      report.pass = false;
      return report;
    }
    const Instrument mi = instrument_marginal(j, i + 1, unchecked);
    const Instrument ri = reduced_instrument(mi, i + 1, factors, unchecked);
    double dev = 0.0;
    for (std::size_t y = 0; y < t.outcome_count(); ++y)
      dev = std::max(dev,
                     operation_deviation(ri.operation(y), t.operation(y)));
    report.target_deviation.push_back(dev);
    if (dev > tol.eps) detail << "target " << i + 1 << ": deviation " << dev << "; ";

    // Coexisting instruments have coexisting measured observables: marginals
    // of the measured joint must match the targets' measured observables.
    const Observable mhat = marginal(j_hat, i + 1, unchecked);
    const Observable that = measured_observable(t, unchecked);
    double mdev = 0.0;
    for (std::size_t y = 0; y < that.outcome_count(); ++y)
      mdev = std::max(mdev, max_abs_diff(mhat.effect(y), that.effect(y)));
    report.measured_marginal_deviation.push_back(mdev);
    if (mdev > tol.eps)
      detail << "measured marginal " << i + 1 << ": deviation " << mdev << "; ";
  }
  double mx = 0.0;
  for (double d : report.target_deviation) mx = std::max(mx, d);
  for (double d : report.measured_marginal_deviation) mx = std::max(mx, d);
  report.max_deviation = mx;
  report.pass = mx <= tol.eps;
  report.detail = detail.str();
  return report;
}

}  // namespace qm
