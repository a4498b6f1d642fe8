#include "qm/observable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qm {

State::State(ComplexMatrix rho, Tolerance tol) : rho_(std::move(rho)) {
  rho_.require_square("state");
  if (!rho_.all_finite()) throw ValidationError("state: non-finite entry");
  const double defect = hermiticity_defect(rho_);
  if (defect > tol.eps)
    throw ValidationError("state: not Hermitian; max |rho - rho*| = " +
                          std::to_string(defect));
  const double lo = min_eigenvalue(rho_, tol.eps);
  if (lo < -tol.eps)
    throw ValidationError("state: not PSD; eigenvalue " + std::to_string(lo));
  const double tr = rho_.trace().real();
  if (std::abs(tr - 1.0) > tol.eps)
    throw ValidationError("state: trace " + std::to_string(tr) + " != 1");
}

Observable::Observable(OutcomeSpace space, std::vector<ComplexMatrix> effects,
                       Tolerance tol)
    : space_(std::move(space)), effects_(std::move(effects)) {
  if (effects_.size() != space_.outcome_count())
    throw ValidationError("observable: effect count " +
                          std::to_string(effects_.size()) +
                          " != outcome count " +
                          std::to_string(space_.outcome_count()));
  if (effects_.empty()) throw ValidationError("observable: no effects");
  dim_ = effects_.front().rows();

  std::ostringstream bad;
  bool ok = true;
  ComplexMatrix sum(dim_, dim_);
  for (std::size_t i = 0; i < effects_.size(); ++i) {
    const ComplexMatrix& e = effects_[i];
    if (e.rows() != dim_ || e.cols() != dim_) {
      ok = false;
      bad << "effect \"" << join_outcome(space_.outcome_at(i))
          << "\": shape mismatch; ";
      continue;
    }
    const EffectCheck check = validate_effect(e, tol);
    if (!check.ok) {
      ok = false;
      bad << "effect \"" << join_outcome(space_.outcome_at(i)) << "\": "
          << check.diagnostic << "; ";
    }
    sum += e;
  }
  if (ok) {
    const double residual = max_abs_diff(sum, ComplexMatrix::identity(dim_));
    if (residual > tol.eps) {
      ok = false;
      bad << "completeness residual " << residual << " > " << tol.eps;
    }
  }
  if (!ok) throw ValidationError("observable invalid: " + bad.str());
}

Observable Observable::trivial(std::size_t dim, std::string label) {
  return Observable(OutcomeSpace::single_axis({std::move(label)}),
                    {ComplexMatrix::identity(dim)});
}

ComplexMatrix Observable::subset_effect(
    const std::vector<std::size_t>& indices) const {
  ComplexMatrix sum(dim_, dim_);
  for (std::size_t i : indices) {
    if (i >= effects_.size())
      throw DimensionError("subset_effect: index out of range");
    sum += effects_[i];
  }
  return sum;
}

Observable validate_observable(const OutcomeSpace& space,
                               const std::map<std::string, ComplexMatrix>& effects,
                               std::size_t dim, Tolerance tol) {
  std::vector<ComplexMatrix> ordered(space.outcome_count());
  std::vector<bool> present(space.outcome_count(), false);
  for (const auto& [key, m] : effects) {
    const Outcome o = split_outcome(key, space.axis_count());
    const std::size_t idx = space.index_of(o);
    if (present[idx])
      throw ValidationError("observable: duplicate effect for \"" + key + "\"");
    present[idx] = true;
    ordered[idx] = m;
  }
  for (std::size_t i = 0; i < present.size(); ++i)
    if (!present[i])
      throw ValidationError("observable: missing effect for \"" +
                            join_outcome(space.outcome_at(i)) + "\"");
  for (const auto& m : ordered)
    if (m.rows() != dim || m.cols() != dim)
      throw ValidationError("observable: effect shape != declared dim " +
                            std::to_string(dim));
  return Observable(space, std::move(ordered), tol);
}

ProbabilityTable distribution(const Observable& a, const State& rho) {
  if (rho.dim() != a.dim())
    throw DimensionError("distribution: state dim != observable dim");
  ProbabilityTable table;
  for (std::size_t i = 0; i < a.outcome_count(); ++i)
    table[a.space().outcome_at(i)] =
        (rho.matrix() * a.effect(i)).trace().real();
  return table;
}

double distribution(const Observable& a, const State& rho,
                    const std::vector<Outcome>& delta) {
  if (rho.dim() != a.dim())
    throw DimensionError("distribution: state dim != observable dim");
  std::vector<std::size_t> indices;
  indices.reserve(delta.size());
  for (const Outcome& o : delta) indices.push_back(a.space().index_of(o));
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return (rho.matrix() * a.subset_effect(indices)).trace().real();
}

Observable part(const Observable& a, const OutcomeMap& f, Tolerance tol) {
  if (!(f.source() == a.space()))
    throw ValidationError("part: map source != observable outcome space");
  const std::size_t n = f.target().outcome_count();
  std::vector<ComplexMatrix> effects(n, ComplexMatrix(a.dim(), a.dim()));
  // Single pass over source outcomes in canonical order: each target effect
  // accumulates its fiber in ascending source order.
  for (std::size_t x = 0; x < a.outcome_count(); ++x)
    effects[f.apply_index(x)] += a.effect(x);
  Observable b(f.target(), std::move(effects), tol);
  b.trivial_part_ = (n == 1);
  return b;
}

Observable marginal(const Observable& a, std::size_t axis, Tolerance tol) {
  if (axis == 0 || axis > a.space().axis_count())
    throw DimensionError("marginal: axis out of range");
  if (a.space().axis_count() == 1) return a;
  const std::size_t ax = axis - 1;
  const OutcomeSpace target = OutcomeSpace::single_axis(a.space().axis(ax));
  std::vector<ComplexMatrix> effects(target.outcome_count(),
                                     ComplexMatrix(a.dim(), a.dim()));
  for (std::size_t x = 0; x < a.outcome_count(); ++x) {
    const Outcome o = a.space().outcome_at(x);
    effects[a.space().label_index(ax, o[ax])] += a.effect(x);
  }
  return Observable(target, std::move(effects), tol);
}

namespace {

// Axis labels contributed by one factor of a product: its single axis, or
// the flattened tuple labels when it is itself multi-axis.
std::vector<std::string> factor_labels(const OutcomeSpace& s) {
  if (s.axis_count() == 1) return s.axis(0);
  return s.flattened_labels();
}

}  // namespace

Observable tensor_observables(const std::vector<Observable>& parts,
                              Tolerance tol) {
  if (parts.size() < 2)
    throw ValidationError("tensor_observables: need at least 2 parts");
  std::vector<std::vector<std::string>> axes;
  axes.reserve(parts.size());
  for (const Observable& p : parts) axes.push_back(factor_labels(p.space()));
  OutcomeSpace space(std::move(axes));

  std::vector<ComplexMatrix> effects;
  effects.reserve(space.outcome_count());
  for (std::size_t idx = 0; idx < space.outcome_count(); ++idx) {
    std::size_t rem = idx;
    std::vector<std::size_t> sub(parts.size());
    for (std::size_t i = parts.size(); i-- > 0;) {
      sub[i] = rem % parts[i].outcome_count();
      rem /= parts[i].outcome_count();
    }
    ComplexMatrix e = parts[0].effect(sub[0]);
    for (std::size_t i = 1; i < parts.size(); ++i)
      e = kron(e, parts[i].effect(sub[i]));
    effects.push_back(std::move(e));
  }
  return Observable(std::move(space), std::move(effects), tol);
}

Observable reduced_observable(const Observable& a, std::size_t factor,
                              const FactorDims& dims, Tolerance tol) {
  if (factor == 0 || factor > dims.count())
    throw DimensionError("reduced_observable: factor out of range");
  if (dims.product() != a.dim())
    throw DimensionError("reduced_observable: dims product != observable dim");
  if (dims.count() == 1) return a;

  std::set<std::size_t> traced;
  double norm = 1.0;
  for (std::size_t f = 0; f < dims.count(); ++f)
    if (f != factor - 1) {
      traced.insert(f);
      norm *= static_cast<double>(dims.dims[f]);
    }
  std::vector<ComplexMatrix> effects;
  effects.reserve(a.outcome_count());
  for (std::size_t i = 0; i < a.outcome_count(); ++i)
    effects.push_back(partial_trace(a.effect(i), dims, traced) *
                      cplx{1.0 / norm, 0.0});
  return Observable(a.space(), std::move(effects), tol);
}

std::optional<std::map<Outcome, double>> identity_observable_check(
    const Observable& a, Tolerance tol) {
  std::map<Outcome, double> weights;
  const double d = static_cast<double>(a.dim());
  for (std::size_t i = 0; i < a.outcome_count(); ++i) {
    const double lambda = a.effect(i).trace().real() / d;
    if (max_abs_diff(a.effect(i),
                     ComplexMatrix::identity(a.dim()) * cplx{lambda, 0.0}) >
        tol.eps)
      return std::nullopt;
    weights[a.space().outcome_at(i)] = lambda;
  }
  return weights;
}

Observable luders_sequential(const std::vector<Observable>& parts,
                             Tolerance tol) {
  if (parts.empty()) throw ValidationError("luders_sequential: no parts");
  const std::size_t dim = parts.front().dim();
  for (const Observable& p : parts)
    if (p.dim() != dim)
      throw DimensionError("luders_sequential: parts on different spaces");
  if (parts.size() == 1) return parts.front();

  // Square roots of every effect of parts 1..n-1 (the last enters linearly).
  std::vector<std::vector<ComplexMatrix>> roots(parts.size() - 1);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i)
    for (std::size_t x = 0; x < parts[i].outcome_count(); ++x)
      roots[i].push_back(psd_sqrt(parts[i].effect(x), tol.eps));

  std::vector<std::vector<std::string>> axes;
  for (const Observable& p : parts) axes.push_back(factor_labels(p.space()));
  OutcomeSpace space(std::move(axes));

  std::vector<ComplexMatrix> effects;
  effects.reserve(space.outcome_count());
  for (std::size_t idx = 0; idx < space.outcome_count(); ++idx) {
    std::size_t rem = idx;
    std::vector<std::size_t> sub(parts.size());
    for (std::size_t i = parts.size(); i-- > 0;) {
      sub[i] = rem % parts[i].outcome_count();
      rem /= parts[i].outcome_count();
    }
    ComplexMatrix e = parts.back().effect(sub.back());
    for (std::size_t i = parts.size() - 1; i-- > 0;) {
      const ComplexMatrix& r = roots[i][sub[i]];
      e = r * e * r;
    }
    effects.push_back(hermitian_part(e));
  }
  return Observable(std::move(space), std::move(effects), tol);
}

Observable commuting_joint(const std::vector<Observable>& parts,
                           Tolerance tol) {
  if (parts.empty()) throw ValidationError("commuting_joint: no parts");
  const std::size_t dim = parts.front().dim();
  for (const Observable& p : parts)
    if (p.dim() != dim)
      throw DimensionError("commuting_joint: parts on different spaces");
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = i + 1; j < parts.size(); ++j)
      for (std::size_t x = 0; x < parts[i].outcome_count(); ++x)
        for (std::size_t y = 0; y < parts[j].outcome_count(); ++y) {
          const ComplexMatrix& ex = parts[i].effect(x);
          const ComplexMatrix& ey = parts[j].effect(y);
          const double comm = max_abs_diff(ex * ey, ey * ex);
          if (comm > tol.eps) {
            std::ostringstream os;
            os << "commuting_joint: construction not applicable; commutator "
                  "norm "
               << comm << " between part " << i + 1 << " outcome \""
               << join_outcome(parts[i].space().outcome_at(x))
               << "\" and part " << j + 1 << " outcome \""
               << join_outcome(parts[j].space().outcome_at(y)) << "\"";
            throw ValidationError(os.str());
          }
        }

  std::vector<std::vector<std::string>> axes;
  for (const Observable& p : parts) axes.push_back(factor_labels(p.space()));
  OutcomeSpace space(std::move(axes));

  std::vector<ComplexMatrix> effects;
  effects.reserve(space.outcome_count());
  for (std::size_t idx = 0; idx < space.outcome_count(); ++idx) {
    std::size_t rem = idx;
    std::vector<std::size_t> sub(parts.size());
    for (std::size_t i = parts.size(); i-- > 0;) {
      sub[i] = rem % parts[i].outcome_count();
      rem /= parts[i].outcome_count();
    }
    ComplexMatrix e = parts[0].effect(sub[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) e = e * parts[i].effect(sub[i]);
    effects.push_back(hermitian_part(e));  // absorb eps-level commutator noise
  }
  return Observable(std::move(space), std::move(effects), tol);
}

JointReport verify_joint(const Observable& c,
                         const std::vector<Observable>& targets,
                         Tolerance tol) {
  JointReport report;
  if (c.space().axis_count() != targets.size()) {
    report.detail = "axis count " + std::to_string(c.space().axis_count()) +
                    " != target count " + std::to_string(targets.size());
    return report;
  }
  std::ostringstream detail;
  bool structural_ok = true;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::vector<std::string>& axis = c.space().axis(i);
    const std::vector<std::string> tlabels = factor_labels(targets[i].space());
    if (axis != tlabels || targets[i].dim() != c.dim()) {
      structural_ok = false;
      detail << "axis " << i + 1 << ": label/dim mismatch; ";
      report.axis_deviation.push_back(
          std::numeric_limits<double>::infinity());
      continue;
    }
    const Observable m = marginal(c, i + 1, tol);
    double dev = 0.0;
    for (std::size_t y = 0; y < m.outcome_count(); ++y)
      dev = std::max(dev, max_abs_diff(m.effect(y), targets[i].effect(y)));
    report.axis_deviation.push_back(dev);
    if (dev > tol.eps)
      detail << "axis " << i + 1 << ": deviation " << dev << "; ";
  }
  report.max_deviation = *std::max_element(report.axis_deviation.begin(),
                                           report.axis_deviation.end());
  report.pass = structural_ok && report.max_deviation <= tol.eps;
  report.detail = detail.str();
  return report;
}

ProductStructureReport verify_product_structure(
    const Observable& a, const std::vector<OutcomeMap>& fs, Tolerance tol) {
  ProductStructureReport report;
  if (fs.empty()) throw ValidationError("verify_product_structure: no maps");
  std::vector<std::vector<std::string>> axes;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const OutcomeMap& f = fs[i];
    if (!(f.source() == a.space()))
      throw ValidationError("verify_product_structure: map " +
                            std::to_string(i + 1) +
                            " source != observable outcome space");
    if (f.target().axis_count() != 1)
      throw ValidationError("verify_product_structure: map " +
                            std::to_string(i + 1) +
                            " target must be single-axis");
    if (f.target().outcome_count() < 2)
      throw ValidationError("verify_product_structure: map " +
                            std::to_string(i + 1) +
                            " has a one-outcome image (trivial part)");
    axes.push_back(f.target().axis(0));
  }
  OutcomeSpace product(axes);
  report.product_space = product;

  // Every fiber intersection must be a singleton; h assembles the bijection.
  std::vector<std::size_t> hits(product.outcome_count(), 0);
  report.bijection.assign(a.outcome_count(), 0);
  for (std::size_t x = 0; x < a.outcome_count(); ++x) {
    std::size_t pidx = 0;
    for (std::size_t i = 0; i < fs.size(); ++i)
      pidx = pidx * fs[i].target().outcome_count() + fs[i].apply_index(x);
    report.bijection[x] = pidx;
    hits[pidx] += 1;
  }
  for (std::size_t p = 0; p < hits.size(); ++p) {
    if (hits[p] != 1) {
      std::ostringstream os;
      os << "intersection for tuple \"" << join_outcome(product.outcome_at(p))
         << "\" has cardinality " << hits[p];
      report.detail = os.str();
      report.bijection.clear();
      return report;
    }
  }

  // Re-index a through h and compare each part(a, f_i) to the i-marginal.
  std::vector<ComplexMatrix> rel(product.outcome_count(),
                                 ComplexMatrix(a.dim(), a.dim()));
  for (std::size_t x = 0; x < a.outcome_count(); ++x)
    rel[report.bijection[x]] = a.effect(x);
  Observable relabeled(product, std::move(rel), tol);
  double dev = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Observable b = part(a, fs[i], tol);
    const Observable m = marginal(relabeled, i + 1, tol);
    for (std::size_t y = 0; y < b.outcome_count(); ++y)
      dev = std::max(dev, max_abs_diff(b.effect(y), m.effect(y)));
  }
  report.max_marginal_deviation = dev;
  report.pass = dev <= tol.eps;
  if (!report.pass)
    report.detail = "part/marginal deviation " + std::to_string(dev);
  return report;
}

}  // namespace qm
