// AVX2+FMA variants of the complex kernels. Complex doubles are kept
// interleaved (re, im), two per 256-bit vector; products use the
// fmaddsub shuffle pattern. This translation unit is compiled with
// -mavx2 -mfma on x86-64 and selected at runtime only when the CPU
// reports both features.

#include "cqq/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define CQQ_HAVE_AVX2_TU 1
#include <immintrin.h>

#include <cstring>
#else
#define CQQ_HAVE_AVX2_TU 0
#endif

namespace cqq::kern {

#if CQQ_HAVE_AVX2_TU

namespace {

// [re0, im0, re1, im1] * (ar + i*ai) for two packed complex doubles.
inline __m256d cmul_scalar(__m256d v, __m256d ar, __m256d ai) {
  __m256d sw = _mm256_permute_pd(v, 0b0101);
  return _mm256_fmaddsub_pd(v, ar, _mm256_mul_pd(sw, ai));
}

void caxpy_v(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  auto* xd = reinterpret_cast<const double*>(x);
  auto* yd = reinterpret_cast<double*>(y);
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    yv = _mm256_add_pd(yv, cmul_scalar(xv, ar, ai));
    _mm256_storeu_pd(yd + 2 * i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void cscale_v(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  auto* xd = reinterpret_cast<const double*>(x);
  auto* yd = reinterpret_cast<double*>(y);
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    _mm256_storeu_pd(yd + 2 * i, cmul_scalar(xv, ar, ai));
  }
  for (; i < n; ++i) y[i] = a * x[i];
}

void cgemm_v(const cplx* a, const cplx* b, cplx* c, std::size_t m,
             std::size_t k, std::size_t n) {
  std::memset(c, 0, m * n * sizeof(cplx));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t q = 0; q < k; ++q) {
      const cplx aiq = a[i * k + q];
      if (aiq == cplx{0.0, 0.0}) continue;
      caxpy_v(aiq, b + q * n, c + i * n, n);
    }
  }
}

void ckron_v(const cplx* a, std::size_t da, const cplx* b, std::size_t db,
             cplx* c) {
  const std::size_t d = da * db;
  for (std::size_t i1 = 0; i1 < da; ++i1)
    for (std::size_t i2 = 0; i2 < db; ++i2) {
      cplx* crow = c + (i1 * db + i2) * d;
      const cplx* brow = b + i2 * db;
      for (std::size_t j1 = 0; j1 < da; ++j1)
        cscale_v(a[i1 * da + j1], brow, crow + j1 * db, db);
    }
}

cplx cdotc_v(const cplx* x, const cplx* y, std::size_t n) {
  const __m256d signs = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t i = 0;
  auto* xd = reinterpret_cast<const double*>(x);
  auto* yd = reinterpret_cast<const double*>(y);
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    acc_re = _mm256_fmadd_pd(xv, yv, acc_re);
    __m256d sw = _mm256_xor_pd(_mm256_permute_pd(xv, 0b0101), signs);
    acc_im = _mm256_fmadd_pd(sw, yv, acc_im);
  }
  alignas(32) double rbuf[4], ibuf[4];
  _mm256_store_pd(rbuf, acc_re);
  _mm256_store_pd(ibuf, acc_im);
  double re = rbuf[0] + rbuf[1] + rbuf[2] + rbuf[3];
  double im = ibuf[0] + ibuf[1] + ibuf[2] + ibuf[3];
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double ddot_v(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  alignas(32) double buf[4];
  _mm256_store_pd(buf, acc);
  double r = buf[0] + buf[1] + buf[2] + buf[3];
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

void crot_v(cplx* x, cplx* y, double c, cplx s, std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  const __m256d sr = _mm256_set1_pd(s.real());
  const __m256d si = _mm256_set1_pd(s.imag());
  const __m256d nsr = _mm256_set1_pd(-s.real());  // -conj(s) = (-re, +im)
  const __m256d psi = _mm256_set1_pd(s.imag());
  std::size_t i = 0;
  auto* xd = reinterpret_cast<double*>(x);
  auto* yd = reinterpret_cast<double*>(y);
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    __m256d nx = _mm256_fmadd_pd(xv, cv, cmul_scalar(yv, sr, si));
    __m256d ny = _mm256_fmadd_pd(yv, cv, cmul_scalar(xv, nsr, psi));
    _mm256_storeu_pd(xd + 2 * i, nx);
    _mm256_storeu_pd(yd + 2 * i, ny);
  }
  const cplx sc = std::conj(s);
  for (; i < n; ++i) {
    const cplx xi = x[i], yi = y[i];
    x[i] = c * xi + s * yi;
    y[i] = -sc * xi + c * yi;
  }
}

}  // namespace

const Ops* avx2_ops() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
    return nullptr;
  static const Ops ops{"avx2",  caxpy_v, cscale_v, cgemm_v,
                       ckron_v, cdotc_v, ddot_v,   crot_v};
  return &ops;
}

#else

const Ops* avx2_ops() { return nullptr; }

#endif

}  // namespace cqq::kern
