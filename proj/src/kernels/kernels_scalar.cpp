#include "cqq/kernels.hpp"

#include <cstring>

namespace cqq::kern {

namespace {

void caxpy_s(cplx a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void cscale_s(cplx a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

void cgemm_s(const cplx* a, const cplx* b, cplx* c, std::size_t m,
             std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(cplx));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t q = 0; q < k; ++q) {
      const cplx aiq = a[i * k + q];
      if (aiq == cplx{0.0, 0.0}) continue;
      const cplx* brow = b + q * n;
      cplx* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aiq * brow[j];
    }
  }
}

void ckron_s(const cplx* a, std::size_t da, const cplx* b, std::size_t db,
             cplx* c) {
  const std::size_t d = da * db;
  for (std::size_t i1 = 0; i1 < da; ++i1)
    for (std::size_t i2 = 0; i2 < db; ++i2) {
      cplx* crow = c + (i1 * db + i2) * d;
      const cplx* brow = b + i2 * db;
      for (std::size_t j1 = 0; j1 < da; ++j1) {
        const cplx aij = a[i1 * da + j1];
        cplx* seg = crow + j1 * db;
        for (std::size_t j2 = 0; j2 < db; ++j2) seg[j2] = aij * brow[j2];
      }
    }
}

cplx cdotc_s(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double ddot_s(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void crot_s(cplx* x, cplx* y, double c, cplx s, std::size_t n) {
  const cplx sc = std::conj(s);
  for (std::size_t i = 0; i < n; ++i) {
    const cplx xi = x[i], yi = y[i];
    x[i] = c * xi + s * yi;
    y[i] = -sc * xi + c * yi;
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{"scalar", caxpy_s, cscale_s, cgemm_s, ckron_s,
                       cdotc_s, ddot_s,   crot_s};
  return ops;
}

}  // namespace cqq::kern
