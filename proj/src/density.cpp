#include "cqq/density.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>

#include "cqq/eig.hpp"
#include "cqq/errors.hpp"

namespace cqq {

namespace {
constexpr double kStateTol = 1e-10;

std::size_t dims_product(const std::vector<int>& dims) {
  std::size_t p = 1;
  for (int d : dims) p *= static_cast<std::size_t>(d);
  return p;
}
}  // namespace

std::optional<std::string> density_violation(const CMatrix& m,
                                             const std::vector<int>& dims) {
  if (!m.square()) return "matrix is not square";
  if (dims.empty()) return "subsystem_dims is empty";
  for (int d : dims)
    if (d <= 0) return "subsystem dimension must be positive";
  if (dims_product(dims) != m.rows)
    return "product of subsystem_dims does not equal dim";
  if (hermiticity_defect(m) > kStateTol) return "matrix is not Hermitian";
  if (std::abs(trace(m) - cplx(1.0)) > kStateTol) return "trace is not 1";
  const auto eigs = hermitian_eigenvalues(m);
  if (!eigs.empty() && eigs.back() < -kStateTol)
    return "matrix has a negative eigenvalue";
  return std::nullopt;
}

DensityMatrix DensityMatrix::make(CMatrix m, std::vector<int> subsystem_dims) {
  if (auto err = density_violation(m, subsystem_dims))
    throw ValidationError("invalid density matrix: " + *err);
  return DensityMatrix{std::move(m), std::move(subsystem_dims)};
}

std::optional<std::string> distribution_violation(
    const std::vector<double>& probs) {
  if (probs.empty()) return "distribution is empty";
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) return "negative probability";
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) return "probabilities do not sum to 1";
  return std::nullopt;
}

ClassicalDistribution ClassicalDistribution::make(std::vector<double> probs) {
  if (auto err = distribution_violation(probs))
    throw ValidationError("invalid distribution: " + *err);
  return ClassicalDistribution{std::move(probs)};
}

double l1_distance(const ClassicalDistribution& p,
                   const ClassicalDistribution& q) {
  if (p.size() != q.size()) throw ValidationError("distribution size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    d += std::abs(p.probs[i] - q.probs[i]);
  return d;
}

ClassicalDistribution uniform_distribution(std::size_t n) {
  return ClassicalDistribution{std::vector<double>(n, 1.0 / double(n))};
}

std::optional<std::string> povm_violation(const std::vector<CMatrix>& effects,
                                          bool complete) {
  if (effects.empty()) return "POVM has no effects";
  const std::size_t d = effects.front().rows;
  CMatrix sum(d, d);
  for (const CMatrix& e : effects) {
    if (!e.square() || e.rows != d) return "effect dimension mismatch";
    if (hermiticity_defect(e) > kStateTol) return "effect is not Hermitian";
    const auto eigs = hermitian_eigenvalues(e);
    if (eigs.back() < -kStateTol) return "effect has a negative eigenvalue";
    if (eigs.front() > 1.0 + kStateTol) return "effect exceeds the identity";
    accumulate(sum, 1.0, e);
  }
  for (std::size_t i = 0; i < d; ++i) sum(i, i) -= 1.0;
  if (complete) {
    if (max_abs(sum) > 1e-9) return "effects do not sum to the identity";
  } else {
    const auto eigs = hermitian_eigenvalues(sum);
    if (eigs.front() > kStateTol) return "effects exceed the identity";
  }
  return std::nullopt;
}

Povm Povm::make(std::vector<CMatrix> effects, bool complete) {
  if (auto err = povm_violation(effects, complete))
    throw ValidationError("invalid POVM: " + *err);
  return Povm{std::move(effects), complete};
}

CMatrix partial_trace_matrix(const CMatrix& m, const std::vector<int>& dims,
                             const std::vector<int>& keep) {
  const std::size_t nsub = dims.size();
  if (keep.empty()) throw ValidationError("partial_trace: empty keep set");
  std::vector<bool> kept(nsub, false);
  for (int k : keep) {
    if (k < 0 || static_cast<std::size_t>(k) >= nsub)
      throw ValidationError("partial_trace: subsystem index out of range");
    if (kept[k]) throw ValidationError("partial_trace: duplicate index");
    kept[k] = true;
  }
  if (dims_product(dims) != m.rows)
    throw ValidationError("partial_trace: dims do not match matrix");

  // Row-major strides over the factor lattice.
  std::vector<std::size_t> stride(nsub, 1);
  for (std::size_t i = nsub; i-- > 1;)
    stride[i - 1] = stride[i] * static_cast<std::size_t>(dims[i]);

  std::vector<int> keep_sorted, traced;
  for (std::size_t i = 0; i < nsub; ++i)
    (kept[i] ? keep_sorted : traced).push_back(static_cast<int>(i));

  std::size_t dk = 1, dt = 1;
  for (int i : keep_sorted) dk *= static_cast<std::size_t>(dims[i]);
  for (int i : traced) dt *= static_cast<std::size_t>(dims[i]);

  auto offset = [&](const std::vector<int>& subs, std::size_t flat) {
    std::size_t off = 0;
    for (std::size_t j = subs.size(); j-- > 0;) {
      const std::size_t d = static_cast<std::size_t>(dims[subs[j]]);
      off += (flat % d) * stride[subs[j]];
      flat /= d;
    }
    return off;
  };

  std::vector<std::size_t> keep_off(dk), tr_off(dt);
  for (std::size_t i = 0; i < dk; ++i) keep_off[i] = offset(keep_sorted, i);
  for (std::size_t i = 0; i < dt; ++i) tr_off[i] = offset(traced, i);

  CMatrix out(dk, dk);
  for (std::size_t r = 0; r < dk; ++r)
    for (std::size_t c = 0; c < dk; ++c) {
      cplx acc = 0.0;
      for (std::size_t t = 0; t < dt; ++t)
        acc += m(keep_off[r] + tr_off[t], keep_off[c] + tr_off[t]);
      out(r, c) = acc;
    }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep) {
  CMatrix out = partial_trace_matrix(rho.m, rho.subsystem_dims, keep);
  std::vector<int> kd;
  std::vector<bool> kept(rho.subsystem_dims.size(), false);
  for (int k : keep) kept[k] = true;
  for (std::size_t i = 0; i < rho.subsystem_dims.size(); ++i)
    if (kept[i]) kd.push_back(rho.subsystem_dims[i]);
  return DensityMatrix{std::move(out), std::move(kd)};
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  DensityMatrix r;
  r.m = kron(a.m, b.m);
  r.subsystem_dims = a.subsystem_dims;
  r.subsystem_dims.insert(r.subsystem_dims.end(), b.subsystem_dims.begin(),
                          b.subsystem_dims.end());
  return r;
}

DensityMatrix tensor_power(const DensityMatrix& a, int k) {
  if (k < 1)
    throw ValidationError("tensor_power: k must be >= 1");
  DensityMatrix r = a;
  for (int i = 1; i < k; ++i) r = tensor(r, a);
  return r;
}

DensityMatrix flat_state(int dim) {
  CMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0 / double(dim);
  return DensityMatrix{std::move(m), {dim}};
}

DensityMatrix pure_basis_state(int dim, int k) {
  return DensityMatrix{basis_projector(dim, k), {dim}};
}

}  // namespace cqq
