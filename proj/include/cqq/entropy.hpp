#pragma once

#include <optional>
#include <vector>

#include "cqq/density.hpp"

namespace cqq {

// All entropic quantities use base-two logarithms.

double binary_entropy(double x);
double shannon_entropy(const std::vector<double>& probs);
double shannon_entropy(const ClassicalDistribution& p);

double von_neumann_entropy(const DensityMatrix& rho);
// Entropy of an arbitrary PSD trace-one Hermitian matrix.
double von_neumann_entropy(const CMatrix& m);

// Unhalved trace norm distance ||a - b||_1, in [0, 2].
double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b);
double trace_norm_distance(const CMatrix& a, const CMatrix& b);
double trace_norm(const CMatrix& m);

// S(A|B) = S(rho) - S(rho_B); a and b must partition the subsystems.
double conditional_entropy(const DensityMatrix& rho, const std::vector<int>& a,
                           const std::vector<int>& b);

// I(A;B) = S(rho_A) + S(rho_B) - S(rho_AB); with a classical conditioning
// subsystem X, sum_x P(x) I(A;B, rho_x). The conditioning register must be
// block-diagonal within 1e-10.
double mutual_information(const DensityMatrix& rho, const std::vector<int>& a,
                          const std::vector<int>& b,
                          std::optional<int> conditioning = std::nullopt);

}  // namespace cqq
