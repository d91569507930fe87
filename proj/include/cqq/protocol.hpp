#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cqq/source.hpp"
#include "cqq/types.hpp"

namespace cqq {

struct ResourceCaps {
  // |X|^n * L * M and dim_E^n must both stay below this.
  std::size_t state_budget = std::size_t(1) << 24;
  // Separate guard for dense accumulations (entries, not bytes).
  std::size_t dense_budget = std::size_t(1) << 24;
};

// Decoder POVM on B^{(x)n} for one public message. Effects live either as
// dense matrices or, when everything in play commutes with the computational
// basis, as real diagonal vectors; the two lanes carry identical semantics.
struct DecoderSet {
  bool diagonal = false;
  std::vector<CMatrix> dense;             // per key value m
  std::vector<std::vector<double>> diag;  // per key value m

  std::size_t effect_count() const {
    return diagonal ? diag.size() : dense.size();
  }
  std::size_t dim() const {
    return diagonal ? (diag.empty() ? 0 : diag.front().size())
                    : (dense.empty() ? 0 : dense.front().rows);
  }
  // Converts a diagonal decoder to dense form (no-op when already dense).
  void densify();
};

struct Protocol {
  int n = 0;
  int alphabet = 0;
  std::size_t l_count = 0;
  std::size_t m_count = 0;

  struct TEntry {
    std::uint32_t l = 0;
    std::uint32_t m = 0;
    double w = 0.0;
  };
  // Row per input word (flattened base-|X|, most significant letter first).
  std::vector<std::vector<TEntry>> t_rows;
  std::vector<DecoderSet> decoders;  // size l_count, m_count effects each

  double log_m() const;
  void validate() const;  // throws ValidationError
};

// Family of protocols selected by the sender marginal; decoders are shared
// through each entry's protocol value.
struct SmiProtocol {
  struct Entry {
    ClassicalDistribution p;
    Protocol protocol;
  };
  std::vector<Entry> family;
  double match_tol = 1e-9;
};

struct MemberReport {
  double error_prob = 0.0;
  double security_index = 0.0;
  std::vector<double> key_marginal;
};

struct ProtocolReport {
  std::vector<MemberReport> members;
  double worst_case = 0.0;  // max over members of max(error, security)
  double log_m = 0.0;
  int n = 0;
};

MemberReport evaluate_protocol(const Protocol& protocol, const CqqState& state,
                               const ResourceCaps& caps = {});
ProtocolReport evaluate_on_source(const Protocol& protocol,
                                  const CompoundSource& source,
                                  const ResourceCaps& caps = {});
ProtocolReport evaluate_on_source(const SmiProtocol& smi,
                                  const CompoundSource& source,
                                  const ResourceCaps& caps = {});

// Unnormalized (l, m)-blocks of the joint of (Lambda, K) with one quantum
// register (side 0: B^n, side 1: E^n); block trace equals P(l, m). Dense
// only; meant for small instances and cross-checks.
struct KeyRegisterJoint {
  std::size_t l_count = 0, m_count = 0;
  std::vector<CMatrix> blocks;  // indexed l * m_count + m
  double mutual_information() const;  // I(K; Lambda R)
};
KeyRegisterJoint key_register_joint(const Protocol& protocol,
                                    const CqqState& state, int side,
                                    const ResourceCaps& caps = {});

// Square-root measurement for a codebook: D_m = S^{-1/2} rho_m S^{-1/2}
// with S = sum_m rho_m, pseudo-inverse cut at 1e-12; a remainder effect is
// appended so the POVM is complete.
Povm pgm_povm(const std::vector<std::vector<int>>& codebook,
              const CqChannel& channel_b, int n,
              const ResourceCaps& caps = {});

// Average error of a complete decoder POVM whose first |codebook| effects
// decode the codebook (helper shared by tests and the binning construction).
double pgm_average_error(const Povm& povm,
                         const std::vector<std::vector<int>>& codebook,
                         const CqChannel& channel_b, int n);

struct BinningParams {
  double delta = 0.0;
  double eta = 0.0;
  double rate = 0.0;  // R = inf_q (chi_B - chi_E)
  std::vector<TypeClass> retained;
  std::vector<std::size_t> l_lambda;
  std::vector<std::size_t> s_lambda;
  std::size_t m = 1;
  std::vector<std::string> log;  // construction notes (empty cells, routing)
};

struct BinningResult {
  Protocol protocol;
  BinningParams params;
};

// Random binning over type classes per the displayed parameter formulas;
// decoders are per-(type, l) square-root measurements with effects summed
// over the s index. Bit-for-bit reproducible for a fixed seed.
BinningResult random_binning_protocol(const CompoundSource& source, int n,
                                      double delta, double eta,
                                      std::uint64_t seed,
                                      const ResourceCaps& caps = {});

// Parameter formulas only (exposed so tests can pin the displayed values).
BinningParams binning_parameters(const CompoundSource& source, int n,
                                 double delta, double eta);

struct ConversionResult {
  std::vector<std::vector<int>> codebook;
  std::size_t m = 0;
  bool fallback = false;  // padded with the designated typical word
};

// Keep the first M = floor(theta (n+1)^{-|X|} M') codewords lying in
// T_lambda^n, padding when fewer exist.
ConversionResult constant_composition_convert(
    const std::vector<std::vector<int>>& codebook, const TypeClass& lambda,
    double theta);

struct TwoPhaseSpec {
  int grid_k = 0;  // estimation grid = types of length grid_k
  std::map<int, Protocol> per_cell;  // keyed by index into enumerate_types
};

// Estimate the type of the first ceil(sqrt(n)) letters, then run the
// matching cell's protocol on the remaining letters; the public message
// carries (cell id, l).
Protocol two_phase_protocol(const CompoundSource& source, int n,
                            const TwoPhaseSpec& spec,
                            const ResourceCaps& caps = {});

// Nearest grid type for an observed prefix type (ties break to the lowest
// grid index).
int classify_to_grid(const TypeClass& observed, int grid_k);

struct EstimationReport {
  double misclass_prob = 0.0;  // estimated cell farther than 1/k from p
  double bound = 0.0;          // 2^{-a c / k^2}, c = 2/ln 2
};
EstimationReport estimation_error(const ClassicalDistribution& p, int grid_k,
                                  int a);

struct ChernovRow {
  std::size_t m = 0;
  double empirical = 0.0;
  double bound = 0.0;
};
struct MatrixChernovReport {
  std::vector<ChernovRow> rows;
  bool non_increasing = false;
};

// Empirical deviation probability of codebook averages from the type-class
// average state, against the displayed matrix concentration bound.
MatrixChernovReport matrix_chernov_experiment(
    const CqChannel& w, const TypeClass& lambda, int n,
    const std::vector<std::size_t>& m_list, double eps, double delta,
    int trials, std::uint64_t seed, int threads = 1);

struct ClassicalChernovReport {
  double empirical = 0.0;
  double bound = 0.0;  // 2^{-n delta^2 E^2 / ln 2}
  bool holds = false;
};
ClassicalChernovReport classical_chernov_experiment(int n, double delta,
                                                    double mean, int trials,
                                                    std::uint64_t seed);

// Rate-module bridge: converse bound for a measured protocol performance.
double protocol_converse_bound(const CompoundSource& source,
                               const ProtocolReport& report, int z, int zprime,
                               std::uint64_t seed, int restarts = 8);

}  // namespace cqq
