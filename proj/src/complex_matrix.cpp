#include "qm/complex_matrix.hpp"

#include <cmath>

#include "qm/kernels.hpp"

namespace qm {

bool ComplexMatrix::all_finite() const {
  for (const cplx& v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

double ComplexMatrix::max_abs() const {
  double m = 0.0;
  for (const cplx& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const cplx& v : data_) s += std::norm(v);
  return std::sqrt(s);
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    throw DimensionError("add: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_)
    throw DimensionError("sub: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (cplx& v : data_) v *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("mul: shape mismatch");
  ComplexMatrix c(a.rows(), b.cols());
  kernels::matmul(a.raw(), b.raw(), c.raw(), a.rows(), a.cols(), b.cols());
  return c;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  m.require_square("hermitian_part");
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out.at(r, c) = 0.5 * (m.at(r, c) + std::conj(m.at(c, r)));
  return out;
}

double hermiticity_defect(const ComplexMatrix& m) {
  m.require_square("hermiticity_defect");
  double d = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      d = std::max(d, std::abs(m.at(r, c) - std::conj(m.at(c, r))));
  return d;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  kernels::kron(a.raw(), a.rows(), a.cols(), b.raw(), b.rows(), b.cols(),
                out.raw());
  return out;
}

ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors) {
  if (factors.empty()) throw DimensionError("kron_all: no factors");
  ComplexMatrix acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = kron(acc, factors[i]);
  return acc;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const FactorDims& dims,
                            const std::set<std::size_t>& traced) {
  dims.require_matches(m, "partial_trace");
  for (std::size_t f : traced)
    if (f >= dims.count())
      throw DimensionError("partial_trace: traced factor out of range");
  if (traced.size() == dims.count())
    throw DimensionError("partial_trace: tracing all factors; use trace()");

  std::vector<std::size_t> kept, tr;
  for (std::size_t f = 0; f < dims.count(); ++f)
    (traced.count(f) ? tr : kept).push_back(f);

  // Composite-index offsets for every kept and traced sub-index combination,
  // enumerated with the leftmost factor most significant.
  auto offsets = [&](const std::vector<std::size_t>& factors) {
    std::vector<std::size_t> out{0};
    for (std::size_t f : factors) {
      std::vector<std::size_t> next;
      next.reserve(out.size() * dims.dims[f]);
      const std::size_t s = dims.stride(f);
      for (std::size_t base : out)
        for (std::size_t i = 0; i < dims.dims[f]; ++i)
          next.push_back(base + i * s);
      out = std::move(next);
    }
    return out;
  };

  const std::vector<std::size_t> kept_offsets = offsets(kept);
  const std::vector<std::size_t> traced_offsets = offsets(tr);
  ComplexMatrix out(kept_offsets.size(), kept_offsets.size());
  kernels::partial_trace(m.raw(), m.rows(), kept_offsets, traced_offsets,
                         out.raw());
  return out;
}

}  // namespace qm
