#include "qm/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qm {

namespace {

double offdiag_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t q = p + 1; q < a.cols(); ++q) s += std::norm(a.at(p, q));
  return std::sqrt(2.0 * s);
}

}  // namespace

HermitianEig eig_hermitian(const ComplexMatrix& h, double hermitian_tol) {
  h.require_square("eig_hermitian");
  if (h.rows() == 0) throw DimensionError("eig_hermitian: empty matrix");
  if (!h.all_finite()) throw ValidationError("eig_hermitian: non-finite entry");
  const double defect = hermiticity_defect(h);
  if (defect > hermitian_tol) {
    std::ostringstream os;
    os << "eig_hermitian: not Hermitian; max |h - h*| = " << defect;
    throw ValidationError(os.str());
  }

  const std::size_t n = h.rows();
  ComplexMatrix a = hermitian_part(h);  // strip eps-level asymmetry
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double scale = std::max(1.0, a.frobenius_norm());
  const double stop = 1e-14 * scale;
  const int max_sweeps = 100;

  for (int sweep = 0; sweep < max_sweeps && offdiag_norm(a) > stop; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a.at(p, q);
        const double r = std::abs(apq);
        if (r <= 1e-18 * scale) continue;

        const cplx phase = apq / r;
        const double app = a.at(p, p).real();
        const double aqq = a.at(q, q).real();
        const double tau = (aqq - app) / (2.0 * r);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // Unitary U differing from I only at (p,q):
        //   U[p][p]=c, U[p][q]=s*phase, U[q][p]=-s*conj(phase), U[q][q]=c.
        // a <- U† a U, v <- v U.
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * std::conj(phase) * akq;
          a.at(k, q) = s * phase * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * phase * aqk;
          a.at(q, k) = s * std::conj(phase) * apk + c * aqk;
        }
        a.at(p, q) = 0.0;
        a.at(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * std::conj(phase) * vkq;
          v.at(k, q) = s * phase * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a.at(i, i).real() < a.at(j, j).real();
  });

  HermitianEig out;
  out.values.resize(n);
  out.vectors = ComplexMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a.at(order[j], order[j]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors.at(i, j) = v.at(i, order[j]);
  }
  return out;
}

ComplexMatrix psd_sqrt(const ComplexMatrix& h, double eps) {
  const HermitianEig eig = eig_hermitian(h, eps);
  const std::size_t n = h.rows();
  if (!eig.values.empty() && eig.values.front() < -eps) {
    std::ostringstream os;
    os << "psd_sqrt: not PSD; eigenvalue " << eig.values.front() << " < "
       << -eps;
    throw ValidationError(os.str());
  }
  ComplexMatrix scaled(n, n);  // V * diag(sqrt(max(lambda, 0)))
  for (std::size_t j = 0; j < n; ++j) {
    const double root = std::sqrt(std::max(eig.values[j], 0.0));
    for (std::size_t i = 0; i < n; ++i)
      scaled.at(i, j) = eig.vectors.at(i, j) * root;
  }
  return hermitian_part(scaled * eig.vectors.adjoint());
}

double min_eigenvalue(const ComplexMatrix& h, double hermitian_tol) {
  const HermitianEig eig = eig_hermitian(h, hermitian_tol);
  return eig.values.empty() ? 0.0 : eig.values.front();
}

EffectCheck validate_effect(const ComplexMatrix& m, Tolerance tol) {
  EffectCheck out;
  if (!m.is_square() || m.rows() == 0) {
    out.diagnostic = m.rows() == 0 ? "empty matrix" : "not square";
    return out;
  }
  if (!m.all_finite()) {
    out.diagnostic = "non-finite entry";
    return out;
  }
  const double defect = hermiticity_defect(m);
  if (defect > tol.eps) {
    std::ostringstream os;
    os << "not Hermitian; max |m - m*| = " << defect << " > " << tol.eps;
    out.diagnostic = os.str();
    return out;
  }
  const HermitianEig eig = eig_hermitian(m, tol.eps);
  out.min_eig = eig.values.front();
  out.max_eig = eig.values.back();
  if (out.min_eig < -tol.eps) {
    std::ostringstream os;
    os << "eigenvalue " << out.min_eig << " < 0";
    out.diagnostic = os.str();
    return out;
  }
  if (out.max_eig > 1.0 + tol.eps) {
    std::ostringstream os;
    os << "eigenvalue " << out.max_eig << " > 1";
    out.diagnostic = os.str();
    return out;
  }
  out.ok = true;
  return out;
}

}  // namespace qm
