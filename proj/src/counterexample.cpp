#include "cqq/counterexample.hpp"

#include <cmath>

#include "cqq/entropy.hpp"
#include "cqq/errors.hpp"

namespace cqq {

namespace {

bool is_balanced(const ClassicalDistribution& p) {
  return p.size() == 2 && std::abs(p.probs[0] - 0.5) < 1e-12;
}

// W1(x) = |x><x| (x) flat, W2(y) = flat (x) |y><y| on two qubits.
DensityMatrix w1(int x) {
  DensityMatrix r = tensor(pure_basis_state(2, x), flat_state(2));
  r.subsystem_dims = {4};
  return r;
}

DensityMatrix w2(int y) {
  DensityMatrix r = tensor(flat_state(2), pure_basis_state(2, y));
  r.subsystem_dims = {4};
  return r;
}

DensityMatrix be_output(const DensityMatrix& b, const DensityMatrix& e) {
  DensityMatrix r = tensor(b, e);
  r.subsystem_dims = {4, 4};
  return r;
}

}  // namespace

std::vector<ClassicalDistribution> default_counterexample_grid(int count) {
  if (count < 2)
    throw ValidationError("counterexample grid needs at least 2 points");
  std::vector<ClassicalDistribution> grid;
  grid.push_back(uniform_distribution(2));
  int added = 1;
  for (int j = 1; j <= count && added < count; ++j) {
    const double v = double(j) / double(count + 1);
    if (std::abs(v - 0.5) < 1e-12) continue;
    grid.push_back(ClassicalDistribution::make({v, 1.0 - v}));
    ++added;
  }
  return grid;
}

CounterexampleSource build_counterexample(
    const std::vector<ClassicalDistribution>& p_grid) {
  if (p_grid.size() < 2)
    throw ValidationError("counterexample: grid needs the balanced point and "
                          "at least one other");
  int pi_index = -1;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    if (p_grid[i].size() != 2)
      throw ValidationError("counterexample: grid entries must be binary");
    if (is_balanced(p_grid[i])) {
      if (pi_index >= 0)
        throw ValidationError("counterexample: duplicate balanced point");
      pi_index = static_cast<int>(i);
    }
  }
  if (pi_index < 0)
    throw ValidationError("counterexample: grid lacks the balanced point");

  std::vector<CqqState> members;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    std::vector<double> weights(4);
    std::vector<DensityMatrix> outs(4);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        const int a = 2 * x + y;
        if (static_cast<int>(i) == pi_index) {
          weights[a] = 0.25;
          outs[a] = be_output(w1(x), w2(y));
        } else {
          // p weights the eavesdropper's letter; the key letter y stays
          // uniform so one uniform key bit per symbol survives.
          weights[a] = 0.5 * p_grid[i].probs[x];
          outs[a] = be_output(w2(y), w1(x));
        }
      }
    members.push_back(CqqState::make(ClassicalDistribution::make(weights),
                                     CqChannel::make(std::move(outs))));
  }
  return {CompoundSource::make(std::move(members)), p_grid, pi_index};
}

namespace {

// Decoders shared by every branch: l = 0 measures the first qubit of each
// B symbol, l = 1 the second. Effects are diagonal.
std::vector<DecoderSet> branch_decoders(int n) {
  const std::size_t m_count = std::size_t(1) << n;
  const std::size_t dim = std::size_t(1) << (2 * n);
  std::vector<DecoderSet> decoders(2);
  for (int l = 0; l < 2; ++l) {
    decoders[l].diagonal = true;
    decoders[l].diag.assign(m_count, std::vector<double>(dim, 0.0));
    for (std::size_t j = 0; j < dim; ++j) {
      // Basis index digits per symbol: (q1, q2) with q1 = first qubit.
      std::size_t m = 0, rest = j;
      for (int pos = 0; pos < n; ++pos) {
        const std::size_t symbol =
            (rest >> (2 * (n - 1 - pos))) & 0x3;  // MSB symbol first
        const std::size_t bit = l == 0 ? (symbol >> 1) : (symbol & 1);
        m = (m << 1) | bit;
      }
      (void)rest;
      decoders[l].diag[m][j] = 1.0;
    }
  }
  return decoders;
}

// Branch stochastic map: key bits from the x parts (branch 0) or y parts
// (branch 1) of the pair letters.
Protocol branch_protocol(int n, int branch) {
  Protocol proto;
  proto.n = n;
  proto.alphabet = 4;
  proto.l_count = 2;
  proto.m_count = std::size_t(1) << n;
  proto.decoders = branch_decoders(n);
  const std::size_t words = std::size_t(1) << (2 * n);
  proto.t_rows.resize(words);
  for (std::size_t w = 0; w < words; ++w) {
    std::size_t m = 0;
    for (int pos = 0; pos < n; ++pos) {
      const std::size_t a = (w >> (2 * (n - 1 - pos))) & 0x3;
      const std::size_t x = a >> 1, y = a & 1;
      m = (m << 1) | (branch == 0 ? x : y);
    }
    proto.t_rows[w].push_back(
        {static_cast<std::uint32_t>(branch), static_cast<std::uint32_t>(m),
         1.0});
  }
  proto.validate();
  return proto;
}

}  // namespace

Protocol pi_branch_protocol(const CounterexampleSource& cx, int n) {
  (void)cx;
  return branch_protocol(n, 0);
}

SmiCapacityResult smi_capacity_protocol(const CounterexampleSource& cx, int n,
                                        const ResourceCaps& caps) {
  if (n < 1) throw ValidationError("smi_capacity_protocol: n must be >= 1");
  SmiCapacityResult res;
  const Protocol pi = branch_protocol(n, 0);
  const Protocol other = branch_protocol(n, 1);
  for (std::size_t i = 0; i < cx.p_grid.size(); ++i) {
    const auto& member_p = cx.source.states[i].p;
    res.protocol.family.push_back(
        {member_p,
         static_cast<int>(i) == cx.pi_index ? pi : other});
  }
  res.report = evaluate_on_source(res.protocol, cx.source, caps);
  return res;
}

GapReport no_smi_gap_demo(const CounterexampleSource& cx,
                          const Protocol& blind, int n,
                          const ResourceCaps& caps) {
  if (blind.n != n)
    throw ValidationError("no_smi_gap_demo: protocol blocklength mismatch");
  GapReport rep;
  rep.log_m = blind.log_m();
  const ProtocolReport full = evaluate_on_source(blind, cx.source, caps);
  rep.worst_case = full.worst_case;

  const double mu = std::min(1.0, full.worst_case);
  const double dim_klb =
      double(blind.m_count) * double(blind.l_count) *
      std::pow(4.0, double(n));
  auto fannes_f = [&](double a) {
    const double c = std::min(a, 0.5);
    return 4.0 * c * std::log2(dim_klb) + 2.0 * binary_entropy(c);
  };
  const auto& pi = cx.p_grid[cx.pi_index];
  for (std::size_t i = 0; i < cx.p_grid.size(); ++i) {
    GapRow row;
    row.p = cx.p_grid[i];
    row.error_prob = full.members[i].error_prob;
    row.security_index = full.members[i].security_index;
    row.chain_bound = mu * rep.log_m + binary_entropy(std::min(mu, 1.0)) + mu +
                      2.0 * fannes_f(double(n) * l1_distance(cx.p_grid[i], pi));
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace cqq
