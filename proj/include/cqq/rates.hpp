#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cqq/source.hpp"

namespace cqq {

// Column-stochastic matrix: entry(r, c) = P(out = r | in = c); every column
// sums to 1 within 1e-10 and entries are nonnegative.
struct StochasticMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  StochasticMatrix() = default;
  StochasticMatrix(int r, int c) : rows(r), cols(c), a(std::size_t(r) * c, 0.0) {}

  double& operator()(int r, int c) { return a[std::size_t(r) * cols + c]; }
  const double& operator()(int r, int c) const {
    return a[std::size_t(r) * cols + c];
  }

  static StochasticMatrix identity_like(int rows, int cols);
  static StochasticMatrix constant(int rows, int cols, int target_row = 0);
  static StochasticMatrix deterministic(const std::vector<int>& row_of_col,
                                        int rows);
  void validate() const;  // throws ValidationError
};

// Markov chain T <- U <- Y given by transition matrices P(u|y), P(t|u).
struct MarkovPreprocessing {
  StochasticMatrix p_u_given_y;  // |U| x |Y|
  StochasticMatrix p_t_given_u;  // |T| x |U|

  int z() const { return p_u_given_y.rows; }
  int zprime() const { return p_t_given_u.rows; }
  void validate() const;
};

// sum_{t,u,y} P(t|u) P(u|y) p(y) |t><t| (x) |u><u| (x) V(y) on subsystem
// dims (|T|, |U|, dim_b, dim_e); classical on T and U.
DensityMatrix apply_preprocessing(const CqqState& state,
                                  const MarkovPreprocessing& gamma);

// min over group members of I(U;B|T) minus max over members of I(U;E|T),
// both on the preprocessed states.
double group_objective(const CompoundSource& source, const MarginalGroup& group,
                       const MarkovPreprocessing& gamma);

// Both conditional informations for one member (exposed for tests).
struct PreprocessedInfos {
  double i_ub_given_t = 0.0;
  double i_ue_given_t = 0.0;
};
PreprocessedInfos preprocessed_infos(const CqqState& state,
                                     const MarkovPreprocessing& gamma);

struct OptimizerOptions {
  int restarts = 64;
  int max_sweeps = 500;
  double min_improvement = 1e-7;
  std::uint64_t seed = 0;
  int threads = 1;
  long long eval_budget = -1;  // < 0 means unlimited
  std::vector<MarkovPreprocessing> warm_starts;
};

struct TraceEntry {
  std::string start;  // which start produced this ascent
  int sweeps = 0;
  double value = 0.0;
};

struct GroupRate {
  ClassicalDistribution p;
  double value = 0.0;  // sup over searched gammas (>= 0: constant chain)
  MarkovPreprocessing best;
  std::vector<TraceEntry> trace;
  long long evaluations = 0;
};

struct RateResult {
  double value = 0.0;  // min over per_group values, clamped at 0
  std::vector<GroupRate> per_group;
  bool converged = true;  // false when the evaluation budget ran out
};

// Heuristic evaluation of the single-letter rate K1: exact min over the
// finite groups, multi-start coordinate ascent over the Markov chains.
// Reported values are lower bounds on the true supremum.
RateResult optimize_k1(const CompoundSource& source, int z, int zprime,
                       const OptimizerOptions& opts = {});

// (1/k) optimize_k1 on the k-fold extension, k in {1, 2}; the k = 2 run is
// warm-started with products of the base run's best chains.
RateResult multi_letter_rate(const CompoundSource& source, int k, int z,
                             int zprime, const OptimizerOptions& opts = {});

// K1(I^{(x)k}) + 2 mu + mu log M + h(mu): any (k,M,L,mu)-protocol must have
// log M below this.
double converse_value(const CompoundSource& source, int k, double mu,
                      double log_m, int z, int zprime,
                      const OptimizerOptions& opts = {});

}  // namespace cqq
