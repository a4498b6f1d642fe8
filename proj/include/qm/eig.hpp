#ifndef QM_EIG_HPP
#define QM_EIG_HPP

#include <string>
#include <vector>

#include "qm/complex_matrix.hpp"

namespace qm {

// Eigendecomposition of a Hermitian matrix: h = V diag(values) V†, values
// ascending, V unitary with eigenvectors in columns.
struct HermitianEig {
  std::vector<double> values;
  ComplexMatrix vectors;
};

// Cyclic Jacobi with a fixed sweep order (p ascending, then q), so repeated
// runs give identical output. Input must be Hermitian within hermitian_tol.
HermitianEig eig_hermitian(const ComplexMatrix& h, double hermitian_tol = 1e-9);

// Unique PSD square root via eig_hermitian; eigenvalues in [-eps, 0) are
// clamped to 0, anything below -eps is rejected as not PSD.
ComplexMatrix psd_sqrt(const ComplexMatrix& h, double eps = 1e-9);

// Smallest eigenvalue of a Hermitian matrix (quantitative PSD check).
double min_eigenvalue(const ComplexMatrix& h, double hermitian_tol = 1e-9);

struct EffectCheck {
  bool ok = false;
  std::string diagnostic;  // names the violated condition and offending value
  double min_eig = 0.0;
  double max_eig = 0.0;
};

// True iff m is Hermitian within eps with all eigenvalues in [-eps, 1+eps].
EffectCheck validate_effect(const ComplexMatrix& m, Tolerance tol = {});

}  // namespace qm

#endif
