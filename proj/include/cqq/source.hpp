#pragma once

#include <vector>

#include "cqq/density.hpp"
#include "cqq/entropy.hpp"

namespace cqq {

// Classical-quantum channel: one output state per input letter.
struct CqChannel {
  int alphabet_size = 0;
  std::vector<int> out_dims;            // subsystem dims of every output
  std::vector<DensityMatrix> outputs;   // size alphabet_size

  std::size_t out_dim() const {
    std::size_t d = 1;
    for (int v : out_dims) d *= static_cast<std::size_t>(v);
    return d;
  }
  static CqChannel make(std::vector<DensityMatrix> outputs);
};

// Sender distribution plus a cq channel with bipartite (B, E) outputs.
struct CqqState {
  ClassicalDistribution p;
  CqChannel channel;  // out_dims = {dim_b, dim_e}

  int alphabet() const { return channel.alphabet_size; }
  int dim_b() const { return channel.out_dims.at(0); }
  int dim_e() const { return channel.out_dims.at(1); }

  static CqqState make(ClassicalDistribution p, CqChannel channel);
};

// Finite generating set; all members share alphabet and output dims.
struct CompoundSource {
  std::vector<CqqState> states;

  int alphabet() const { return states.front().alphabet(); }
  int dim_b() const { return states.front().dim_b(); }
  int dim_e() const { return states.front().dim_e(); }
  std::size_t size() const { return states.size(); }

  static CompoundSource make(std::vector<CqqState> states);
};

struct MarginalGroup {
  ClassicalDistribution p;   // representative (first member's marginal)
  std::vector<int> members;  // indices into the source
};

// Coherified density matrix sum_x p(x)|x><x| (x) rho_{BE,x} on subsystem
// dims (|X|, dim_b, dim_e).
DensityMatrix coherify(const CqqState& state);

double holevo_chi(const ClassicalDistribution& p, const CqChannel& v);

// Per-letter partial traces of the channel onto B or E.
CqChannel restrict_to_b(const CqqState& state);
CqChannel restrict_to_e(const CqqState& state);

struct MarginalSets {
  std::vector<DensityMatrix> ab;
  std::vector<DensityMatrix> ae;
};
MarginalSets marginal_sets(const CompoundSource& source,
                           const MarginalGroup& group);

std::vector<MarginalGroup> group_by_sender_marginal(
    const CompoundSource& source, double tol = 1e-9);

// Replace each member by its k-fold memoryless extension (alphabet |X|^k,
// p^{(x)k}, V^{(x)k}); throws ResourceError past dim_cap.
CompoundSource tensor_extension(const CompoundSource& source, int k,
                                std::size_t dim_cap = 4096);

}  // namespace cqq
