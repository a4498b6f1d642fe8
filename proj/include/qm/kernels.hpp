#ifndef QM_KERNELS_HPP
#define QM_KERNELS_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace qm::kernels {

using cplx = std::complex<double>;

// Dense kernels in two builds: a serial reference (qm::kernels::serial) and
// the OpenMP versions below, which parallelize over output entries so the
// per-entry summation order is identical to the reference. Results are
// bit-equal to the serial build for any thread count; tests and the bench
// target compare the two.

namespace serial {

// c = a * b, a is m x k, b is k x n, all row-major.
void matmul(const cplx* a, const cplx* b, cplx* c, std::size_t m,
            std::size_t k, std::size_t n);

// out = a (x) b, a is ra x ca, b is rb x cb; out is (ra*rb) x (ca*cb).
void kron(const cplx* a, std::size_t ra, std::size_t ca, const cplx* b,
          std::size_t rb, std::size_t cb, cplx* out);

// out[i][j] = sum_t m[(ko[i]+to[t]) * side + ko[j]+to[t]] where ko/to are
// precomputed kept/traced composite-index offsets.
void partial_trace(const cplx* m, std::size_t side,
                   const std::vector<std::size_t>& kept_offsets,
                   const std::vector<std::size_t>& traced_offsets, cplx* out);

}  // namespace serial

void matmul(const cplx* a, const cplx* b, cplx* c, std::size_t m,
            std::size_t k, std::size_t n);

void kron(const cplx* a, std::size_t ra, std::size_t ca, const cplx* b,
          std::size_t rb, std::size_t cb, cplx* out);

void partial_trace(const cplx* m, std::size_t side,
                   const std::vector<std::size_t>& kept_offsets,
                   const std::vector<std::size_t>& traced_offsets, cplx* out);

}  // namespace qm::kernels

#endif
