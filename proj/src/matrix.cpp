#include "cqq/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cqq/errors.hpp"

namespace cqq {

namespace {
void require_same_shape(const CMatrix& x, const CMatrix& y) {
  if (x.rows != y.rows || x.cols != y.cols)
    throw ValidationError("matrix shape mismatch");
}
}  // namespace

CMatrix operator+(const CMatrix& x, const CMatrix& y) {
  require_same_shape(x, y);
  CMatrix r = x;
  kern::ops().caxpy(1.0, y.a.data(), r.a.data(), r.a.size());
  return r;
}

CMatrix operator-(const CMatrix& x, const CMatrix& y) {
  require_same_shape(x, y);
  CMatrix r = x;
  kern::ops().caxpy(-1.0, y.a.data(), r.a.data(), r.a.size());
  return r;
}

CMatrix operator*(const CMatrix& x, const CMatrix& y) {
  if (x.cols != y.rows) throw ValidationError("matrix product shape mismatch");
  CMatrix r(x.rows, y.cols);
  kern::ops().cgemm(x.a.data(), y.a.data(), r.a.data(), x.rows, x.cols, y.cols);
  return r;
}

CMatrix operator*(cplx s, const CMatrix& x) {
  CMatrix r(x.rows, x.cols);
  kern::ops().cscale(s, x.a.data(), r.a.data(), x.a.size());
  return r;
}

void accumulate(CMatrix& y, cplx s, const CMatrix& x) {
  require_same_shape(y, x);
  kern::ops().caxpy(s, x.a.data(), y.a.data(), y.a.size());
}

CMatrix adjoint(const CMatrix& m) {
  CMatrix r(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) r(j, i) = std::conj(m(i, j));
  return r;
}

CMatrix kron(const CMatrix& x, const CMatrix& y) {
  if (!x.square() || !y.square())
    throw ValidationError("kron expects square matrices");
  CMatrix r(x.rows * y.rows, x.cols * y.cols);
  kern::ops().ckron(x.a.data(), x.rows, y.a.data(), y.rows, r.a.data());
  return r;
}

cplx trace(const CMatrix& m) {
  cplx t = 0.0;
  const std::size_t n = std::min(m.rows, m.cols);
  for (std::size_t i = 0; i < n; ++i) t += m(i, i);
  return t;
}

double frobenius_norm(const CMatrix& m) {
  double s = 0.0;
  for (const cplx& v : m.a) s += std::norm(v);
  return std::sqrt(s);
}

double max_abs(const CMatrix& m) {
  double s = 0.0;
  for (const cplx& v : m.a) s = std::max(s, std::abs(v));
  return s;
}

double hermiticity_defect(const CMatrix& m) {
  if (!m.square()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = i; j < m.cols; ++j)
      d = std::max(d, std::abs(m(i, j) - std::conj(m(j, i))) * 0.5);
  return d;
}

double offdiag_mass(const CMatrix& m) {
  double d = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      if (i != j) d = std::max(d, std::abs(m(i, j)));
  return d;
}

bool approx_equal(const CMatrix& x, const CMatrix& y, double tol) {
  if (x.rows != y.rows || x.cols != y.cols) return false;
  for (std::size_t i = 0; i < x.a.size(); ++i)
    if (std::abs(x.a[i] - y.a[i]) > tol) return false;
  return true;
}

CMatrix outer(const std::vector<cplx>& v, const std::vector<cplx>& w) {
  CMatrix r(v.size(), w.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j) r(i, j) = v[i] * std::conj(w[j]);
  return r;
}

CMatrix basis_projector(std::size_t n, std::size_t k) {
  CMatrix r(n, n);
  r(k, k) = 1.0;
  return r;
}

}  // namespace cqq
