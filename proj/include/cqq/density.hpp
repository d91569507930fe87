#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cqq/matrix.hpp"

namespace cqq {

// Complex Hermitian PSD unit-trace matrix with explicit subsystem dimensions.
struct DensityMatrix {
  CMatrix m;
  std::vector<int> subsystem_dims;

  std::size_t dim() const { return m.rows; }

  // Validates and returns the state; throws ValidationError otherwise.
  static DensityMatrix make(CMatrix m, std::vector<int> subsystem_dims);
};

// Explanation of the first violated invariant, or nullopt when valid.
std::optional<std::string> density_violation(const CMatrix& m,
                                             const std::vector<int>& dims);

struct ClassicalDistribution {
  std::vector<double> probs;

  static ClassicalDistribution make(std::vector<double> probs);
  std::size_t size() const { return probs.size(); }
};

std::optional<std::string> distribution_violation(
    const std::vector<double>& probs);

// Variational distance sum_i |p_i - q_i|.
double l1_distance(const ClassicalDistribution& p,
                   const ClassicalDistribution& q);

ClassicalDistribution uniform_distribution(std::size_t n);

struct Povm {
  std::vector<CMatrix> effects;
  bool complete = true;  // sub-normalized decoder sets carry complete=false

  static Povm make(std::vector<CMatrix> effects, bool complete = true);
};

std::optional<std::string> povm_violation(const std::vector<CMatrix>& effects,
                                          bool complete);

// --- operations on multipartite states -----------------------------------

// Trace out every subsystem not listed in `keep` (indices into
// subsystem_dims, any order; result keeps the original relative order).
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep);

// Same contraction on a raw matrix with explicit factor dimensions.
CMatrix partial_trace_matrix(const CMatrix& m, const std::vector<int>& dims,
                             const std::vector<int>& keep);

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
DensityMatrix tensor_power(const DensityMatrix& a, int k);

DensityMatrix flat_state(int dim);                  // maximally mixed
DensityMatrix pure_basis_state(int dim, int k);     // |k><k|

}  // namespace cqq
