#ifndef QM_COMPLEX_MATRIX_HPP
#define QM_COMPLEX_MATRIX_HPP

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <set>
#include <vector>

#include "qm/error.hpp"

namespace qm {

using cplx = std::complex<double>;

// Absolute tolerance for all approximate predicates (Hermitian, PSD,
// equality, completeness). Comparisons are max-absolute-entry or
// min-eigenvalue against eps.
struct Tolerance {
  double eps = 1e-9;
};

// Dense row-major complex matrix. Values are immutable in spirit: every
// operation returns a fresh matrix, nothing mutates shared state.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix from_rows(
      std::initializer_list<std::initializer_list<cplx>> rows) {
    ComplexMatrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != m.cols_) throw DimensionError("ragged matrix literal");
      std::size_t c = 0;
      for (const auto& v : row) m.at(r, c++) = v;
      ++r;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool empty() const { return data_.empty(); }

  cplx& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& at(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  const std::vector<cplx>& data() const { return data_; }
  cplx* raw() { return data_.data(); }
  const cplx* raw() const { return data_.data(); }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c)
        out.at(c, r) = std::conj(at(r, c));
    return out;
  }

  cplx trace() const {
    require_square("trace");
    cplx t{0.0, 0.0};
    for (std::size_t i = 0; i < rows_; ++i) t += at(i, i);
    return t;
  }

  bool all_finite() const;
  double max_abs() const;
  double frobenius_norm() const;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cplx s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) {
    a += b;
    return a;
  }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) {
    a -= b;
    return a;
  }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) {
    a *= s;
    return a;
  }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) {
    a *= s;
    return a;
  }
  // Matrix product; dispatches to the kernel layer.
  friend ComplexMatrix operator*(const ComplexMatrix& a,
                                 const ComplexMatrix& b);

  // Exact entrywise equality (used by the zero-tolerance suites).
  friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  void require_square(const char* op) const {
    if (!is_square()) throw DimensionError(std::string(op) + ": matrix not square");
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

// max over entries of |a - b|; shapes must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

inline bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b,
                         double eps) {
  return max_abs_diff(a, b) <= eps;
}

// Hermitian part (m + m†)/2, used to absorb eps-level drift before
// validation of analytically Hermitian results.
ComplexMatrix hermitian_part(const ComplexMatrix& m);

// max entry of |m - m†|.
double hermiticity_defect(const ComplexMatrix& m);

// Ordered tensor-factor dimensions m1,...,mn annotating a square matrix of
// side m1*...*mn. Composite index convention: the composite row index of
// factor indices (i1,...,in) is i1*m2*...*mn + ... + in, i.e. the leftmost
// factor is the most significant digit.
struct FactorDims {
  std::vector<std::size_t> dims;

  FactorDims() = default;
  FactorDims(std::initializer_list<std::size_t> ds) : dims(ds) {}
  explicit FactorDims(std::vector<std::size_t> ds) : dims(std::move(ds)) {}

  std::size_t count() const { return dims.size(); }

  std::size_t product() const {
    std::size_t p = 1;
    for (std::size_t d : dims) p *= d;
    return p;
  }

  // Stride of factor f in the composite index.
  std::size_t stride(std::size_t f) const {
    std::size_t s = 1;
    for (std::size_t g = f + 1; g < dims.size(); ++g) s *= dims[g];
    return s;
  }

  void require_matches(const ComplexMatrix& m, const char* op) const {
    if (!m.is_square() || m.rows() != product())
      throw DimensionError(std::string(op) +
                           ": factor dims do not match matrix side");
    for (std::size_t d : dims)
      if (d == 0) throw DimensionError(std::string(op) + ": zero factor dim");
  }
};

// Kronecker product under the FactorDims index convention. Left-fold order
// is canonical for n-fold products.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors);

// Partial trace over the factors listed in `traced` (0-based). The result
// lives on the remaining factors in their original order; the full trace is
// preserved. Tracing every factor is rejected (use trace()).
ComplexMatrix partial_trace(const ComplexMatrix& m, const FactorDims& dims,
                            const std::set<std::size_t>& traced);

}  // namespace qm

#endif
