#pragma once

#include <vector>

#include "cqq/matrix.hpp"

namespace cqq {

struct EigResult {
  std::vector<double> values;  // descending
  CMatrix vectors;             // unitary, column k pairs with values[k]
};

// Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi
// rotations. Stops when the off-diagonal Frobenius mass drops below 1e-13
// (scaled by the input norm for large matrices), capped at 100 sweeps.
EigResult hermitian_eig(const CMatrix& m);

// Eigenvalues only (same algorithm, skips the eigenvector accumulation).
std::vector<double> hermitian_eigenvalues(const CMatrix& m);

}  // namespace cqq
