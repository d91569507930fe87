#include "cqq/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cqq/errors.hpp"

namespace cqq {

namespace {

constexpr double kHermTol = 1e-8;
constexpr int kMaxSweeps = 100;

double offdiag_frobenius(const CMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      if (i != j) s += std::norm(m(i, j));
  return std::sqrt(s);
}

// One cyclic sweep of two-sided rotations. vt, when present, accumulates the
// transposed eigenvector matrix (so both updates run on contiguous rows).
void jacobi_sweep(CMatrix& m, CMatrix* vt, double drop) {
  const std::size_t n = m.rows;
  auto& k = kern::ops();
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const cplx g = m(p, q);
      const double ag = std::abs(g);
      if (ag <= drop) continue;
      const double app = m(p, p).real();
      const double aqq = m(q, q).real();
      const cplx phase = g / ag;
      const double tau = (aqq - app) / (2.0 * ag);
      const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                       (std::abs(tau) + std::sqrt(1.0 + tau * tau));
      const double c = 1.0 / std::sqrt(1.0 + t * t);
      const cplx s = phase * (t * c);

      // rows: J^dagger M
      k.crot(m.row(p), m.row(q), c, -s, n);
      // columns: (J^dagger M) J, strided
      const cplx sc = std::conj(s);
      for (std::size_t i = 0; i < n; ++i) {
        const cplx xip = m(i, p), xiq = m(i, q);
        m(i, p) = c * xip - sc * xiq;
        m(i, q) = s * xip + c * xiq;
      }
      if (vt != nullptr) k.crot(vt->row(p), vt->row(q), c, -sc, n);
    }
  }
}

CMatrix jacobi_diagonalize(const CMatrix& input, CMatrix* vt) {
  if (!input.square()) throw ValidationError("hermitian_eig: matrix not square");
  if (hermiticity_defect(input) > kHermTol)
    throw ValidationError("hermitian_eig: matrix not Hermitian within 1e-8");

  CMatrix m = input;
  const std::size_t n = m.rows;
  // Symmetrize so roundoff in the input cannot bias the rotations.
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = cplx(m(i, i).real(), 0.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  }

  const double threshold = 1e-13 * std::max(1.0, frobenius_norm(m));
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (offdiag_frobenius(m) <= threshold) break;
    jacobi_sweep(m, vt, 1e-300);
  }
  return m;
}

}  // namespace

EigResult hermitian_eig(const CMatrix& input) {
  const std::size_t n = input.rows;
  CMatrix vt = CMatrix::identity(n);
  CMatrix d = jacobi_diagonalize(input, &vt);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return d(x, x).real() > d(y, y).real();
  });

  EigResult r;
  r.values.resize(n);
  r.vectors = CMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    r.values[k] = d(order[k], order[k]).real();
    // vt accumulates V^T row-wise; eigenvector k is its row order[k].
    for (std::size_t i = 0; i < n; ++i) r.vectors(i, k) = vt(order[k], i);
  }
  return r;
}

std::vector<double> hermitian_eigenvalues(const CMatrix& input) {
  CMatrix d = jacobi_diagonalize(input, nullptr);
  std::vector<double> vals(input.rows);
  for (std::size_t i = 0; i < input.rows; ++i) vals[i] = d(i, i).real();
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  return vals;
}

}  // namespace cqq
