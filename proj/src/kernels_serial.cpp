#include "qm/kernels.hpp"

namespace qm::kernels::serial {

void matmul(const cplx* a, const cplx* b, cplx* c, std::size_t m,
            std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx acc{0.0, 0.0};
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

void kron(const cplx* a, std::size_t ra, std::size_t ca, const cplx* b,
          std::size_t rb, std::size_t cb, cplx* out) {
  const std::size_t oc = ca * cb;
  for (std::size_t i = 0; i < ra; ++i)
    for (std::size_t j = 0; j < ca; ++j) {
      const cplx aij = a[i * ca + j];
      for (std::size_t p = 0; p < rb; ++p)
        for (std::size_t q = 0; q < cb; ++q)
          out[(i * rb + p) * oc + (j * cb + q)] = aij * b[p * cb + q];
    }
}

void partial_trace(const cplx* m, std::size_t side,
                   const std::vector<std::size_t>& kept_offsets,
                   const std::vector<std::size_t>& traced_offsets, cplx* out) {
  const std::size_t os = kept_offsets.size();
  for (std::size_t i = 0; i < os; ++i) {
    for (std::size_t j = 0; j < os; ++j) {
      cplx acc{0.0, 0.0};
      for (std::size_t t : traced_offsets)
        acc += m[(kept_offsets[i] + t) * side + kept_offsets[j] + t];
      out[i * os + j] = acc;
    }
  }
}

}  // namespace qm::kernels::serial
