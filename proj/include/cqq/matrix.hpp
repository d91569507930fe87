#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "cqq/kernels.hpp"

namespace cqq {

using cplx = std::complex<double>;

// Dense row-major complex matrix. All arithmetic funnels through the
// runtime-selected kernels.
struct CMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cplx> a;

  CMatrix() = default;
  CMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.a[i * n + i] = 1.0;
    return m;
  }

  cplx& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return a[i * cols + j];
  }

  cplx* row(std::size_t i) { return a.data() + i * cols; }
  const cplx* row(std::size_t i) const { return a.data() + i * cols; }

  bool square() const { return rows == cols; }
};

CMatrix operator+(const CMatrix& x, const CMatrix& y);
CMatrix operator-(const CMatrix& x, const CMatrix& y);
CMatrix operator*(const CMatrix& x, const CMatrix& y);
CMatrix operator*(cplx s, const CMatrix& x);

// y += s * x
void accumulate(CMatrix& y, cplx s, const CMatrix& x);

CMatrix adjoint(const CMatrix& m);
CMatrix kron(const CMatrix& x, const CMatrix& y);

cplx trace(const CMatrix& m);
double frobenius_norm(const CMatrix& m);
double max_abs(const CMatrix& m);

// Largest |entry| away from the Hermitian ideal (m - m^dagger)/2.
double hermiticity_defect(const CMatrix& m);
// Largest |off-diagonal entry|.
double offdiag_mass(const CMatrix& m);

bool approx_equal(const CMatrix& x, const CMatrix& y, double tol);

// Outer product |v><w| of column vectors.
CMatrix outer(const std::vector<cplx>& v, const std::vector<cplx>& w);

// Projector |k><k| in an n-dimensional space.
CMatrix basis_projector(std::size_t n, std::size_t k);

}  // namespace cqq
