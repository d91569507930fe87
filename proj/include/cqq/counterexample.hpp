#pragma once

#include <vector>

#include "cqq/protocol.hpp"
#include "cqq/source.hpp"

namespace cqq {

// Irregular compound source with a gap between the marginal-informed and
// blind forward secret-key capacities. The sender letter is a pair (x, y)
// flattened as a = 2x + y; dim_b = dim_e = 4 (two qubits each side).
//
// At the balanced point both coordinates are uniform, B learns x on its
// first qubit and E learns y. Away from it the channel roles swap: B learns
// the still-uniform y on its second qubit while E learns the p-weighted x.
struct CounterexampleSource {
  CompoundSource source;                       // member i matches p_grid[i]
  std::vector<ClassicalDistribution> p_grid;   // over {0,1}; [0] is balanced
  int pi_index = 0;
};

// Grid must contain the balanced distribution and at least one other point.
CounterexampleSource build_counterexample(
    const std::vector<ClassicalDistribution>& p_grid);

// Evenly spread grid of `count` points including the balanced one.
std::vector<ClassicalDistribution> default_counterexample_grid(int count);

struct SmiCapacityResult {
  SmiProtocol protocol;
  ProtocolReport report;
};

// Marginal-informed protocol achieving one key bit per symbol with zero
// error and zero security index at every blocklength: the public message
// carries the branch flag, B measures the key-bearing qubit.
SmiCapacityResult smi_capacity_protocol(const CounterexampleSource& cx, int n,
                                        const ResourceCaps& caps = {});

// The balanced branch as a standalone blind protocol.
Protocol pi_branch_protocol(const CounterexampleSource& cx, int n);

struct GapRow {
  ClassicalDistribution p;
  double error_prob = 0.0;
  double security_index = 0.0;
  double chain_bound = 0.0;  // mu log M + h(mu) + mu + 2 f(n ||p - pi||_1)
};

struct GapReport {
  std::vector<GapRow> rows;
  double worst_case = 0.0;  // max over members of max(error, security)
  double log_m = 0.0;
};

// Runs a blind protocol over the whole grid and reports the per-member
// performance next to the continuity-chain bound; the balanced-branch
// protocol run blind exhibits a security index of one full bit per symbol
// away from the balanced point.
GapReport no_smi_gap_demo(const CounterexampleSource& cx,
                          const Protocol& blind, int n,
                          const ResourceCaps& caps = {});

}  // namespace cqq
