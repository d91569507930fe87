#pragma once

#include <complex>
#include <cstddef>

namespace cqq::kern {

using cplx = std::complex<double>;

// Data-parallel primitives behind the dense complex linear algebra.
// The scalar implementation is the reference; vectorized variants must
// agree with it elementwise (see tests/test_kernels.cpp).
struct Ops {
  const char* name;

  // y += a * x
  void (*caxpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
  // y = a * x
  void (*cscale)(cplx a, const cplx* x, cplx* y, std::size_t n);
  // c = a * b, row-major, a is m x k, b is k x n
  void (*cgemm)(const cplx* a, const cplx* b, cplx* c,
                std::size_t m, std::size_t k, std::size_t n);
  // c = a (x) b for square matrices of order da, db; c has order da*db
  void (*ckron)(const cplx* a, std::size_t da, const cplx* b, std::size_t db,
                cplx* c);
  // sum_i conj(x_i) * y_i
  cplx (*cdotc)(const cplx* x, const cplx* y, std::size_t n);
  // sum_i x_i * y_i
  double (*ddot)(const double* x, const double* y, std::size_t n);
  // two-row unitary rotation, c real:
  //   x' = c*x + s*y,  y' = -conj(s)*x + c*y
  void (*crot)(cplx* x, cplx* y, double c, cplx s, std::size_t n);
};

const Ops& scalar_ops();
const Ops* avx2_ops();  // null when AVX2+FMA is unavailable

// Currently selected implementation. The first call honors CQQ_SIMD
// (scalar|avx2|auto); force() overrides afterwards and returns false for an
// unknown or unsupported lane.
const Ops& ops();
bool force(const char* name);

}  // namespace cqq::kern
