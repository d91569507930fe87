#include "cqq/source.hpp"

#include <cmath>
#include <string>

#include "cqq/errors.hpp"

namespace cqq {

CqChannel CqChannel::make(std::vector<DensityMatrix> outputs) {
  if (outputs.empty()) throw ValidationError("channel has no outputs");
  const auto& dims = outputs.front().subsystem_dims;
  for (const auto& out : outputs) {
    if (out.subsystem_dims != dims)
      throw ValidationError("channel outputs disagree on dimensions");
    if (auto err = density_violation(out.m, out.subsystem_dims))
      throw ValidationError("channel output invalid: " + *err);
  }
  CqChannel ch;
  ch.alphabet_size = static_cast<int>(outputs.size());
  ch.out_dims = dims;
  ch.outputs = std::move(outputs);
  return ch;
}

CqqState CqqState::make(ClassicalDistribution p, CqChannel channel) {
  if (static_cast<int>(p.size()) != channel.alphabet_size)
    throw ValidationError("alphabet size mismatch between p and channel");
  if (channel.out_dims.size() != 2)
    throw ValidationError("cqq channel outputs must be bipartite (B,E)");
  return CqqState{std::move(p), std::move(channel)};
}

CompoundSource CompoundSource::make(std::vector<CqqState> states) {
  if (states.empty()) throw ValidationError("compound source is empty");
  const int k = states.front().alphabet();
  const int db = states.front().dim_b();
  const int de = states.front().dim_e();
  for (const auto& s : states)
    if (s.alphabet() != k || s.dim_b() != db || s.dim_e() != de)
      throw ValidationError("source members disagree on alphabet or dims");
  return CompoundSource{std::move(states)};
}

DensityMatrix coherify(const CqqState& state) {
  const int nx = state.alphabet();
  const std::size_t dbe = state.channel.out_dim();
  const std::size_t dim = static_cast<std::size_t>(nx) * dbe;
  CMatrix m(dim, dim);
  for (int x = 0; x < nx; ++x) {
    const double px = state.p.probs[x];
    if (px == 0.0) continue;
    const CMatrix& out = state.channel.outputs[x].m;
    const std::size_t base = static_cast<std::size_t>(x) * dbe;
    for (std::size_t i = 0; i < dbe; ++i)
      for (std::size_t j = 0; j < dbe; ++j)
        m(base + i, base + j) = px * out(i, j);
  }
  return DensityMatrix{std::move(m), {nx, state.dim_b(), state.dim_e()}};
}

double holevo_chi(const ClassicalDistribution& p, const CqChannel& v) {
  if (static_cast<int>(p.size()) != v.alphabet_size)
    throw ValidationError("holevo_chi: alphabet size mismatch");
  const std::size_t d = v.out_dim();
  CMatrix avg(d, d);
  double avg_entropy = 0.0;
  for (int x = 0; x < v.alphabet_size; ++x) {
    const double px = p.probs[x];
    if (px == 0.0) continue;
    accumulate(avg, px, v.outputs[x].m);
    avg_entropy += px * von_neumann_entropy(v.outputs[x].m);
  }
  return von_neumann_entropy(avg) - avg_entropy;
}

namespace {
CqChannel restrict_channel(const CqqState& state, int keep_subsystem) {
  std::vector<DensityMatrix> outs;
  outs.reserve(state.alphabet());
  for (const auto& o : state.channel.outputs)
    outs.push_back(partial_trace(o, {keep_subsystem}));
  return CqChannel::make(std::move(outs));
}
}  // namespace

CqChannel restrict_to_b(const CqqState& state) {
  return restrict_channel(state, 0);
}

CqChannel restrict_to_e(const CqqState& state) {
  return restrict_channel(state, 1);
}

MarginalSets marginal_sets(const CompoundSource& source,
                           const MarginalGroup& group) {
  MarginalSets sets;
  for (int idx : group.members) {
    const DensityMatrix full = coherify(source.states[idx]);
    sets.ab.push_back(partial_trace(full, {0, 1}));
    sets.ae.push_back(partial_trace(full, {0, 2}));
  }
  return sets;
}

std::vector<MarginalGroup> group_by_sender_marginal(
    const CompoundSource& source, double tol) {
  if (tol < 0.0) throw ValidationError("grouping tolerance must be >= 0");
  std::vector<MarginalGroup> groups;
  for (std::size_t i = 0; i < source.states.size(); ++i) {
    const auto& p = source.states[i].p;
    bool placed = false;
    for (auto& g : groups) {
      if (l1_distance(g.p, p) <= tol) {
        g.members.push_back(static_cast<int>(i));
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({p, {static_cast<int>(i)}});
  }
  return groups;
}

CompoundSource tensor_extension(const CompoundSource& source, int k,
                                std::size_t dim_cap) {
  if (k < 1) throw ValidationError("tensor_extension: k must be >= 1");
  if (k == 1) return source;

  const int nx = source.alphabet();
  double letters = std::pow(double(nx), double(k));
  double total = letters * std::pow(double(source.dim_b()), double(k)) *
                 std::pow(double(source.dim_e()), double(k));
  if (total > double(dim_cap))
    throw ResourceError("tensor_extension: total dimension " +
                        std::to_string(total) + " exceeds cap " +
                        std::to_string(dim_cap));

  const std::size_t nxk = static_cast<std::size_t>(letters);
  std::vector<CqqState> extended;
  for (const auto& s : source.states) {
    std::vector<double> pk(nxk);
    std::vector<DensityMatrix> outs(nxk);
    for (std::size_t word = 0; word < nxk; ++word) {
      // Digits of `word` in base |X|, most significant letter first.
      double prob = 1.0;
      CMatrix rho;
      std::size_t w = word;
      std::vector<int> letters_of(k);
      for (int pos = k - 1; pos >= 0; --pos) {
        letters_of[pos] = static_cast<int>(w % nx);
        w /= nx;
      }
      for (int pos = 0; pos < k; ++pos) {
        const int x = letters_of[pos];
        prob *= s.p.probs[x];
        rho = pos == 0 ? s.channel.outputs[x].m
                       : kron(rho, s.channel.outputs[x].m);
      }
      pk[word] = prob;
      // Interleaved (B1 E1 B2 E2 ...) factors; regroup into (B^k, E^k).
      std::vector<int> dims;
      for (int pos = 0; pos < k; ++pos) {
        dims.push_back(s.dim_b());
        dims.push_back(s.dim_e());
      }
      std::vector<int> border, eorder;
      for (int pos = 0; pos < k; ++pos) {
        border.push_back(2 * pos);
        eorder.push_back(2 * pos + 1);
      }
      // Permute so all B factors precede all E factors.
      const std::size_t dim = rho.rows;
      std::vector<std::size_t> stride(dims.size(), 1);
      for (std::size_t i = dims.size(); i-- > 1;)
        stride[i - 1] = stride[i] * static_cast<std::size_t>(dims[i]);
      std::vector<int> order = border;
      order.insert(order.end(), eorder.begin(), eorder.end());
      std::vector<std::size_t> perm(dim);
      for (std::size_t idx = 0; idx < dim; ++idx) {
        std::size_t rest = idx, off = 0;
        for (std::size_t j = order.size(); j-- > 0;) {
          const std::size_t d = static_cast<std::size_t>(dims[order[j]]);
          off += (rest % d) * stride[order[j]];
          rest /= d;
        }
        perm[idx] = off;
      }
      CMatrix permuted(dim, dim);
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
          permuted(r, c) = rho(perm[r], perm[c]);
      const int dbk = static_cast<int>(std::pow(double(s.dim_b()), double(k)));
      const int dek = static_cast<int>(std::pow(double(s.dim_e()), double(k)));
      outs[word] = DensityMatrix{std::move(permuted), {dbk, dek}};
    }
    extended.push_back(CqqState::make(ClassicalDistribution{std::move(pk)},
                                      CqChannel::make(std::move(outs))));
  }
  return CompoundSource::make(std::move(extended));
}

}  // namespace cqq
