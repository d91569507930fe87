#include "cqq/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "cqq/eig.hpp"
#include "cqq/errors.hpp"

namespace cqq {

namespace {

constexpr double kLog2e = 1.4426950408889634;  // 1/ln 2

double xlogx(double x) { return x <= 0.0 ? 0.0 : x * std::log(x) * kLog2e; }

// Off-diagonal entries below this threshold let the entropy and trace-norm
// paths read eigenvalues straight off the diagonal.
bool effectively_diagonal(const CMatrix& m) { return offdiag_mass(m) < 1e-14; }

std::vector<double> spectrum(const CMatrix& m) {
  if (effectively_diagonal(m)) {
    std::vector<double> v(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) v[i] = m(i, i).real();
    return v;
  }
  return hermitian_eigenvalues(m);
}

}  // namespace

double binary_entropy(double x) {
  if (x < 0.0 || x > 1.0) throw ValidationError("binary_entropy: x not in [0,1]");
  return -xlogx(x) - xlogx(1.0 - x);
}

double shannon_entropy(const std::vector<double>& probs) {
  double s = 0.0;
  for (double p : probs) s -= xlogx(p);
  return s;
}

double shannon_entropy(const ClassicalDistribution& p) {
  return shannon_entropy(p.probs);
}

double von_neumann_entropy(const CMatrix& m) {
  double s = 0.0;
  for (double lambda : spectrum(m)) {
    lambda = std::clamp(lambda, 0.0, 1.0);
    s -= xlogx(lambda);
  }
  return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  return von_neumann_entropy(rho.m);
}

double trace_norm(const CMatrix& m) {
  double s = 0.0;
  for (double lambda : spectrum(m)) s += std::abs(lambda);
  return s;
}

double trace_norm_distance(const CMatrix& a, const CMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw ValidationError("trace_norm_distance: dimension mismatch");
  return trace_norm(a - b);
}

double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_norm_distance(a.m, b.m);
}

namespace {

void require_partition(const DensityMatrix& rho, const std::vector<int>& a,
                       const std::vector<int>& b, bool must_cover) {
  std::vector<int> seen(rho.subsystem_dims.size(), 0);
  for (int i : a) {
    if (i < 0 || static_cast<std::size_t>(i) >= seen.size())
      throw ValidationError("subsystem index out of range");
    ++seen[i];
  }
  for (int i : b) {
    if (i < 0 || static_cast<std::size_t>(i) >= seen.size())
      throw ValidationError("subsystem index out of range");
    ++seen[i];
  }
  for (int c : seen) {
    if (c > 1) throw ValidationError("subsystem partitions overlap");
    if (must_cover && c == 0)
      throw ValidationError("partitions must cover all subsystems");
  }
}

}  // namespace

double conditional_entropy(const DensityMatrix& rho, const std::vector<int>& a,
                           const std::vector<int>& b) {
  require_partition(rho, a, b, /*must_cover=*/true);
  if (b.empty()) return von_neumann_entropy(rho);
  const DensityMatrix rho_b = partial_trace(rho, b);
  return von_neumann_entropy(rho) - von_neumann_entropy(rho_b);
}

double mutual_information(const DensityMatrix& rho, const std::vector<int>& a,
                          const std::vector<int>& b,
                          std::optional<int> conditioning) {
  require_partition(rho, a, b, /*must_cover=*/false);
  if (!conditioning) {
    std::vector<int> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    std::sort(ab.begin(), ab.end());
    const DensityMatrix rho_ab = partial_trace(rho, ab);

    // Re-map the partitions into the reduced state's subsystem order.
    auto remap = [&](const std::vector<int>& part) {
      std::vector<int> out;
      for (int i : part)
        out.push_back(static_cast<int>(
            std::lower_bound(ab.begin(), ab.end(), i) - ab.begin()));
      return out;
    };
    const DensityMatrix rho_a = partial_trace(rho_ab, remap(a));
    const DensityMatrix rho_b = partial_trace(rho_ab, remap(b));
    return von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) -
           von_neumann_entropy(rho_ab);
  }

  const int x = *conditioning;
  for (int i : a)
    if (i == x) throw ValidationError("conditioning overlaps partition a");
  for (int i : b)
    if (i == x) throw ValidationError("conditioning overlaps partition b");

  const std::size_t nsub = rho.subsystem_dims.size();
  const int dx = rho.subsystem_dims[x];

  std::vector<std::size_t> stride(nsub, 1);
  for (std::size_t i = nsub; i-- > 1;)
    stride[i - 1] = stride[i] * static_cast<std::size_t>(rho.subsystem_dims[i]);
  const std::size_t sx = stride[x];
  const std::size_t dim = rho.dim();

  // Verify the conditioning register is classical: no coherence across x.
  for (std::size_t r = 0; r < dim; ++r) {
    const std::size_t xr = (r / sx) % static_cast<std::size_t>(dx);
    for (std::size_t c = 0; c < dim; ++c) {
      const std::size_t xc = (c / sx) % static_cast<std::size_t>(dx);
      if (xr != xc && std::abs(rho.m(r, c)) > 1e-10)
        throw ValidationError(
            "conditioning subsystem is not classical (off-diagonal mass)");
    }
  }

  // Extract block x as a state on the remaining subsystems.
  std::vector<int> rest_dims;
  std::vector<int> rest_index_of(nsub, -1);
  for (std::size_t i = 0; i < nsub; ++i) {
    if (static_cast<int>(i) == x) continue;
    rest_index_of[i] = static_cast<int>(rest_dims.size());
    rest_dims.push_back(rho.subsystem_dims[i]);
  }
  const std::size_t drest = dim / static_cast<std::size_t>(dx);

  auto rest_offset = [&](std::size_t flat) {
    std::size_t off = 0;
    for (std::size_t j = nsub; j-- > 0;) {
      if (static_cast<int>(j) == x) continue;
      const std::size_t d = static_cast<std::size_t>(rho.subsystem_dims[j]);
      off += (flat % d) * stride[j];
      flat /= d;
    }
    return off;
  };
  std::vector<std::size_t> roff(drest);
  for (std::size_t i = 0; i < drest; ++i) roff[i] = rest_offset(i);

  auto remap = [&](const std::vector<int>& part) {
    std::vector<int> out;
    for (int i : part) out.push_back(rest_index_of[i]);
    return out;
  };
  const std::vector<int> ar = remap(a), br = remap(b);

  double total = 0.0;
  for (int xv = 0; xv < dx; ++xv) {
    CMatrix block(drest, drest);
    const std::size_t base = static_cast<std::size_t>(xv) * sx;
    for (std::size_t r = 0; r < drest; ++r)
      for (std::size_t c = 0; c < drest; ++c)
        block(r, c) = rho.m(base + roff[r], base + roff[c]);
    const double px = trace(block).real();
    if (px <= 1e-15) continue;
    CMatrix normalized = (1.0 / px) * block;
    DensityMatrix cond{std::move(normalized), rest_dims};
    total += px * mutual_information(cond, ar, br);
  }
  return total;
}

}  // namespace cqq
