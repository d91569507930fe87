#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cqq/source.hpp"

namespace cqq {

struct HausdorffReport {
  double distance = 0.0;
  // Pair attaining the max-min: witness_from indexes the set whose directed
  // distance realizes the max, witness_to its nearest counterpart.
  int witness_from = 0;
  int witness_to = 0;
  int direction = 0;  // 0: sup over a, 1: sup over b
};

// Hausdorff distance (trace-norm induced) between finite sets of states.
HausdorffReport hausdorff_distance(const std::vector<DensityMatrix>& a,
                                   const std::vector<DensityMatrix>& b);

struct ModulusRow {
  double delta = 0.0;
  double modulus = 0.0;  // sup over close group pairs of d_H^AB + d_H^AE
};

// For each delta: sup over group pairs with ||p-q||_1 < delta of
// d_H(AB sets) + d_H(AE sets); exact over the finite source.
std::vector<ModulusRow> regularity_modulus(const CompoundSource& source,
                                           const std::vector<double>& deltas);

struct TensorPowerHausdorffReport {
  double lhs = 0.0;  // d_H(a^{(x)n}, b^{(x)n})
  double rhs = 0.0;  // n * d_H(a, b)
  bool holds = false;
};

TensorPowerHausdorffReport tensor_power_hausdorff_check(
    const std::vector<DensityMatrix>& a, const std::vector<DensityMatrix>& b,
    int n, std::size_t dim_cap = 4096);

struct CubeCovering {
  double cell_width = 0.0;           // Delta / embedding dimension, per axis
  std::vector<int> assignment;       // member index -> subfamily id
  std::vector<std::vector<int>> subfamilies;
};

// Half-open axis-aligned cells over the (re, im) embedding of the coherified
// members; members sharing a cell land in one subfamily.
CubeCovering cube_cover_decompose(const CompoundSource& source, double delta);

struct ChannelNetReport {
  std::vector<int> net;  // indices into v_set
  bool cardinality_ok = false;
  double cardinality_bound = 0.0;
  double cond2_max_lhs = 0.0;  // max sampled ||V^n(x^n) - W^n(x^n)||_1
  double cond2_rhs = 0.0;      // 2 n alpha
  bool cond2_ok = false;
  double cond3_max_lhs = 0.0;  // max sampled |min_net chi - min_set chi|
  double cond3_rhs = 0.0;      // 2 alpha log(dim / 2 alpha)
  bool cond3_ok = false;
};

// Greedy farthest-point 2alpha-net over the channels (per-letter sup
// trace-norm metric) plus sampled verification of the three net conditions.
ChannelNetReport channel_net(const std::vector<CqChannel>& v_set, double alpha,
                             int n_check, std::uint64_t seed = 0,
                             int samples = 32);

struct ContinuityConfig {
  int samples_alicki_fannes = 1000;
  int samples_holevo_p = 1000;      // |chi(p,V) - chi(q,V)| bound
  int samples_holevo_sets = 200;    // set variant over (Q, Q') pairs
  int samples_cond_mutual = 1000;   // preprocessed conditional MI bound
  int samples_set_shift = 200;      // channel-set vs marginal-shift inequality
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ContinuityRow {
  std::string name;
  int samples = 0;
  int violations = 0;
  double max_margin = 0.0;  // max over samples of lhs - rhs (<= 0 when clean)
};

std::vector<ContinuityRow> continuity_checks(const ContinuityConfig& config);

}  // namespace cqq
