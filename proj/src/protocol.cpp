#include "cqq/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cqq/eig.hpp"
#include "cqq/entropy.hpp"
#include "cqq/errors.hpp"
#include "cqq/parallel.hpp"
#include "cqq/rates.hpp"
#include "cqq/rng.hpp"

namespace cqq {

namespace {

constexpr double kDiagTol = 1e-14;
constexpr double kPinvCut = 1e-12;

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

std::vector<int> word_letters(std::size_t w, int n, int nx) {
  std::vector<int> letters(n);
  for (int pos = n - 1; pos >= 0; --pos) {
    letters[pos] = static_cast<int>(w % nx);
    w /= nx;
  }
  return letters;
}

std::size_t word_index(const std::vector<int>& letters, int nx) {
  std::size_t w = 0;
  for (int a : letters) w = w * nx + static_cast<std::size_t>(a);
  return w;
}

// Per-letter restriction of a member channel to one side, with a diagonal
// fast lane when every output commutes with the computational basis.
struct SideView {
  int dim = 1;
  bool diagonal = true;
  std::vector<std::vector<double>> diag;  // per letter
  std::vector<CMatrix> dense;             // per letter
};

SideView make_side_view(const CqqState& state, int side) {
  SideView v;
  v.dim = side == 0 ? state.dim_b() : state.dim_e();
  for (const auto& out : state.channel.outputs) {
    CMatrix m = partial_trace(out, {side}).m;
    if (offdiag_mass(m) >= kDiagTol) v.diagonal = false;
    v.dense.push_back(std::move(m));
  }
  if (v.diagonal) {
    for (const auto& m : v.dense) {
      std::vector<double> d(v.dim);
      for (int i = 0; i < v.dim; ++i) d[i] = m(i, i).real();
      v.diag.push_back(std::move(d));
    }
  }
  return v;
}

std::vector<double> product_diag(const SideView& v,
                                 const std::vector<int>& letters) {
  std::vector<double> cur{1.0};
  for (int a : letters) {
    const auto& d = v.diag[a];
    std::vector<double> next(cur.size() * d.size());
    std::size_t k = 0;
    for (double c : cur)
      for (double x : d) next[k++] = c * x;
    cur = std::move(next);
  }
  return cur;
}

CMatrix product_dense(const SideView& v, const std::vector<int>& letters) {
  CMatrix cur = v.dense[letters[0]];
  for (std::size_t i = 1; i < letters.size(); ++i)
    cur = kron(cur, v.dense[letters[i]]);
  return cur;
}

double effect_overlap_diag(const std::vector<double>& effect,
                           const std::vector<double>& rho) {
  return kern::ops().ddot(effect.data(), rho.data(), rho.size());
}

double effect_overlap_dense(const CMatrix& effect, const CMatrix& rho) {
  // tr(D rho) = conj(<D, rho>) for Hermitian pairs; real part is exact.
  return std::real(kern::ops().cdotc(effect.a.data(), rho.a.data(),
                                     rho.a.size()));
}

}  // namespace

void DecoderSet::densify() {
  if (!diagonal) return;
  dense.clear();
  dense.reserve(diag.size());
  for (const auto& d : diag) {
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    dense.push_back(std::move(m));
  }
  diagonal = false;
  diag.clear();
}

double Protocol::log_m() const { return std::log2(double(m_count)); }

void Protocol::validate() const {
  if (n < 1 || alphabet < 1 || l_count < 1 || m_count < 1)
    throw ValidationError("protocol: empty shape");
  if (t_rows.size() != ipow(std::size_t(alphabet), n))
    throw ValidationError("protocol: t_rows does not cover the input words");
  for (const auto& row : t_rows) {
    double sum = 0.0;
    for (const auto& e : row) {
      if (e.l >= l_count || e.m >= m_count || e.w < 0.0)
        throw ValidationError("protocol: bad stochastic entry");
      sum += e.w;
    }
    if (std::abs(sum - 1.0) > 1e-10)
      throw ValidationError("protocol: stochastic row does not sum to 1");
  }
  if (decoders.size() != l_count)
    throw ValidationError("protocol: decoder count differs from L");
  for (const auto& dec : decoders) {
    if (dec.effect_count() != m_count)
      throw ValidationError("protocol: decoder effect count differs from M");
    if (dec.diagonal) {
      const std::size_t d = dec.dim();
      for (std::size_t i = 0; i < d; ++i) {
        double sum = 0.0;
        for (const auto& eff : dec.diag) {
          if (eff[i] < -1e-9 || eff[i] > 1.0 + 1e-9)
            throw ValidationError("protocol: decoder effect out of [0,1]");
          sum += eff[i];
        }
        if (std::abs(sum - 1.0) > 1e-9)
          throw ValidationError("protocol: decoder does not resolve identity");
      }
    } else {
      CMatrix sum(dec.dim(), dec.dim());
      for (const auto& eff : dec.dense) accumulate(sum, 1.0, eff);
      for (std::size_t i = 0; i < dec.dim(); ++i) sum(i, i) -= 1.0;
      if (max_abs(sum) > 1e-9)
        throw ValidationError("protocol: decoder does not resolve identity");
    }
  }
}

MemberReport evaluate_protocol(const Protocol& protocol, const CqqState& state,
                               const ResourceCaps& caps) {
  if (protocol.alphabet != state.alphabet())
    throw ValidationError("evaluate_protocol: alphabet mismatch");
  const int n = protocol.n;
  const int nx = protocol.alphabet;
  const std::size_t lcount = protocol.l_count, mcount = protocol.m_count;

  if (std::pow(double(nx), double(n)) * double(lcount) * double(mcount) >
      double(caps.state_budget))
    throw ResourceError("evaluate_protocol: |X|^n * L * M exceeds the cap");
  const double de_n = std::pow(double(state.dim_e()), double(n));
  if (de_n > double(caps.state_budget))
    throw ResourceError("evaluate_protocol: dim_E^n exceeds the cap");
  const std::size_t words = ipow(std::size_t(nx), n);

  SideView bview = make_side_view(state, 0);
  SideView eview = make_side_view(state, 1);
  const std::size_t bdim = ipow(std::size_t(bview.dim), n);
  const std::size_t edim = ipow(std::size_t(eview.dim), n);

  // Lane selection for the B side must match the decoders.
  std::vector<DecoderSet> densified;
  const std::vector<DecoderSet>* decoders = &protocol.decoders;
  bool b_diag = bview.diagonal && !protocol.decoders.empty() &&
                protocol.decoders.front().diagonal;
  if (!b_diag) {
    if (bdim * bdim > caps.dense_budget)
      throw ResourceError("evaluate_protocol: dense B side exceeds the cap");
    if (!protocol.decoders.empty() && protocol.decoders.front().diagonal) {
      densified = protocol.decoders;
      for (auto& d : densified) d.densify();
      decoders = &densified;
    }
  }

  const bool e_trivial = edim == 1;
  const bool e_diag = !e_trivial && eview.diagonal;
  if (e_diag && lcount * mcount * edim > caps.dense_budget)
    throw ResourceError("evaluate_protocol: E-side accumulation exceeds the cap");
  if (!e_trivial && !e_diag &&
      lcount * mcount * edim * edim > caps.dense_budget)
    throw ResourceError("evaluate_protocol: dense E side exceeds the cap");

  std::vector<double> p_lm(lcount * mcount, 0.0);
  std::vector<double> p_kk(mcount * mcount, 0.0);
  std::vector<std::vector<double>> sigma_diag;
  std::vector<CMatrix> sigma_dense;
  if (e_diag)
    sigma_diag.assign(lcount * mcount, std::vector<double>(edim, 0.0));
  else if (!e_trivial)
    sigma_dense.assign(lcount * mcount, CMatrix(edim, edim));

  for (std::size_t w = 0; w < words; ++w) {
    const auto& row = protocol.t_rows[w];
    if (row.empty()) continue;
    const auto letters = word_letters(w, n, nx);
    double pw = 1.0;
    for (int a : letters) pw *= state.p.probs[a];
    if (pw <= 0.0) continue;

    std::vector<double> rho_b_diag;
    CMatrix rho_b_dense;
    if (b_diag)
      rho_b_diag = product_diag(bview, letters);
    else
      rho_b_dense = product_dense(bview, letters);

    std::vector<double> rho_e_diag;
    CMatrix rho_e_dense;
    if (e_diag)
      rho_e_diag = product_diag(eview, letters);
    else if (!e_trivial)
      rho_e_dense = product_dense(eview, letters);

    for (const auto& entry : row) {
      const double weight = pw * entry.w;
      if (weight <= 0.0) continue;
      const std::size_t lm = entry.l * mcount + entry.m;
      p_lm[lm] += weight;
      if (e_diag) {
        auto& acc = sigma_diag[lm];
        for (std::size_t i = 0; i < edim; ++i) acc[i] += weight * rho_e_diag[i];
      } else if (!e_trivial) {
        accumulate(sigma_dense[lm], weight, rho_e_dense);
      }
      const DecoderSet& dec = (*decoders)[entry.l];
      for (std::size_t m2 = 0; m2 < mcount; ++m2) {
        const double overlap =
            b_diag ? effect_overlap_diag(dec.diag[m2], rho_b_diag)
                   : effect_overlap_dense(dec.dense[m2], rho_b_dense);
        p_kk[entry.m * mcount + m2] += weight * overlap;
      }
    }
  }

  MemberReport rep;
  double diag_mass = 0.0, total_mass = 0.0;
  for (std::size_t m = 0; m < mcount; ++m)
    for (std::size_t m2 = 0; m2 < mcount; ++m2) {
      total_mass += p_kk[m * mcount + m2];
      if (m == m2) diag_mass += p_kk[m * mcount + m2];
    }
  rep.error_prob = std::max(0.0, total_mass - diag_mass);

  rep.key_marginal.assign(mcount, 0.0);
  std::vector<double> p_l(lcount, 0.0);
  for (std::size_t l = 0; l < lcount; ++l)
    for (std::size_t m = 0; m < mcount; ++m) {
      rep.key_marginal[m] += p_lm[l * mcount + m];
      p_l[l] += p_lm[l * mcount + m];
    }

  const double h_k = shannon_entropy(rep.key_marginal);
  double info = shannon_entropy(rep.key_marginal) + shannon_entropy(p_l) -
                shannon_entropy(p_lm);
  if (!e_trivial) {
    // I(K; Lambda E^n) needs the conditional register entropies too.
    double s_joint = 0.0, s_lambda = 0.0;
    if (e_diag) {
      for (std::size_t l = 0; l < lcount; ++l) {
        std::vector<double> sl(edim, 0.0);
        for (std::size_t m = 0; m < mcount; ++m) {
          const std::size_t lm = l * mcount + m;
          const double mass = p_lm[lm];
          for (std::size_t i = 0; i < edim; ++i) sl[i] += sigma_diag[lm][i];
          if (mass <= 0.0) continue;
          std::vector<double> norm = sigma_diag[lm];
          for (auto& v : norm) v /= mass;
          s_joint += mass * shannon_entropy(norm);
        }
        if (p_l[l] <= 0.0) continue;
        for (auto& v : sl) v /= p_l[l];
        s_lambda += p_l[l] * shannon_entropy(sl);
      }
    } else {
      for (std::size_t l = 0; l < lcount; ++l) {
        CMatrix sl(edim, edim);
        for (std::size_t m = 0; m < mcount; ++m) {
          const std::size_t lm = l * mcount + m;
          const double mass = p_lm[lm];
          accumulate(sl, 1.0, sigma_dense[lm]);
          if (mass <= 0.0) continue;
          s_joint += mass * von_neumann_entropy((1.0 / mass) * sigma_dense[lm]);
        }
        if (p_l[l] <= 0.0) continue;
        s_lambda += p_l[l] * von_neumann_entropy((1.0 / p_l[l]) * sl);
      }
    }
    info += s_lambda - s_joint;
  }
  if (info < 0.0 && info > -1e-12) info = 0.0;

  rep.security_index = std::log2(double(mcount)) - h_k + info;
  return rep;
}

ProtocolReport evaluate_on_source(const Protocol& protocol,
                                  const CompoundSource& source,
                                  const ResourceCaps& caps) {
  ProtocolReport rep;
  rep.log_m = protocol.log_m();
  rep.n = protocol.n;
  for (const auto& member : source.states) {
    rep.members.push_back(evaluate_protocol(protocol, member, caps));
    rep.worst_case = std::max(
        rep.worst_case, std::max(rep.members.back().error_prob,
                                 rep.members.back().security_index));
  }
  return rep;
}

ProtocolReport evaluate_on_source(const SmiProtocol& smi,
                                  const CompoundSource& source,
                                  const ResourceCaps& caps) {
  if (smi.family.empty()) throw ValidationError("SMI protocol has no entries");
  ProtocolReport rep;
  rep.log_m = smi.family.front().protocol.log_m();
  rep.n = smi.family.front().protocol.n;
  for (const auto& member : source.states) {
    const Protocol* chosen = nullptr;
    for (const auto& entry : smi.family)
      if (l1_distance(entry.p, member.p) <= smi.match_tol) {
        chosen = &entry.protocol;
        break;
      }
    if (chosen == nullptr)
      throw ValidationError(
          "SMI protocol has no family entry for a member's marginal group");
    rep.members.push_back(evaluate_protocol(*chosen, member, caps));
    rep.worst_case = std::max(
        rep.worst_case, std::max(rep.members.back().error_prob,
                                 rep.members.back().security_index));
  }
  return rep;
}

double KeyRegisterJoint::mutual_information() const {
  // I(K; Lambda R) with classical (Lambda, K) blocks.
  std::vector<double> w_lm(blocks.size(), 0.0);
  std::vector<double> w_l(l_count, 0.0), w_m(m_count, 0.0);
  double s_joint = 0.0;
  const std::size_t dim = blocks.front().rows;
  for (std::size_t l = 0; l < l_count; ++l) {
    CMatrix sl(dim, dim);
    double pl = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
      const auto& blk = blocks[l * m_count + m];
      const double mass = trace(blk).real();
      w_lm[l * m_count + m] = mass;
      w_m[m] += mass;
      pl += mass;
      accumulate(sl, 1.0, blk);
      if (mass > 0.0)
        s_joint += mass * von_neumann_entropy((1.0 / mass) * blk);
    }
    w_l[l] = pl;
    if (pl > 0.0) {
      s_joint -= pl * von_neumann_entropy((1.0 / pl) * sl);
    }
  }
  // s_joint now holds sum_lm w S(sigma_lm) - sum_l w S(sigma_l).
  const double info = shannon_entropy(w_m) + shannon_entropy(w_l) -
                      shannon_entropy(w_lm) - s_joint;
  return info < 0.0 && info > -1e-12 ? 0.0 : info;
}

KeyRegisterJoint key_register_joint(const Protocol& protocol,
                                    const CqqState& state, int side,
                                    const ResourceCaps& caps) {
  if (protocol.alphabet != state.alphabet())
    throw ValidationError("key_register_joint: alphabet mismatch");
  const int n = protocol.n, nx = protocol.alphabet;
  const std::size_t words = ipow(std::size_t(nx), n);
  SideView view = make_side_view(state, side);
  const std::size_t rdim = ipow(std::size_t(view.dim), n);
  if (protocol.l_count * protocol.m_count * rdim * rdim > caps.dense_budget)
    throw ResourceError("key_register_joint: dense blocks exceed the cap");

  KeyRegisterJoint joint;
  joint.l_count = protocol.l_count;
  joint.m_count = protocol.m_count;
  joint.blocks.assign(protocol.l_count * protocol.m_count,
                      CMatrix(rdim, rdim));
  for (std::size_t w = 0; w < words; ++w) {
    const auto& row = protocol.t_rows[w];
    if (row.empty()) continue;
    const auto letters = word_letters(w, n, nx);
    double pw = 1.0;
    for (int a : letters) pw *= state.p.probs[a];
    if (pw <= 0.0) continue;
    const CMatrix rho = product_dense(view, letters);
    for (const auto& entry : row)
      if (entry.w > 0.0)
        accumulate(joint.blocks[entry.l * protocol.m_count + entry.m],
                   pw * entry.w, rho);
  }
  return joint;
}

// ---------------------------------------------------------------------------
// Pretty good measurement

namespace {

SideView channel_side_view(const CqChannel& ch) {
  SideView v;
  v.dim = static_cast<int>(ch.out_dim());
  for (const auto& out : ch.outputs) {
    if (offdiag_mass(out.m) >= kDiagTol) v.diagonal = false;
    v.dense.push_back(out.m);
  }
  if (v.diagonal) {
    for (const auto& m : v.dense) {
      std::vector<double> d(v.dim);
      for (int i = 0; i < v.dim; ++i) d[i] = m(i, i).real();
      v.diag.push_back(std::move(d));
    }
  }
  return v;
}

// Diagonal-lane PGM: per-codeword effects rho_m[j] / S[j] on the support.
std::vector<std::vector<double>> pgm_effects_diag(
    const SideView& view, const std::vector<std::vector<int>>& codebook) {
  const std::size_t dim = ipow(std::size_t(view.dim),
                               static_cast<int>(codebook.front().size()));
  std::vector<double> s(dim, 0.0);
  for (const auto& word : codebook) {
    const auto rho = product_diag(view, word);
    for (std::size_t i = 0; i < dim; ++i) s[i] += rho[i];
  }
  std::vector<std::vector<double>> effects;
  effects.reserve(codebook.size());
  for (const auto& word : codebook) {
    auto rho = product_diag(view, word);
    for (std::size_t i = 0; i < dim; ++i)
      rho[i] = s[i] > kPinvCut ? rho[i] / s[i] : 0.0;
    effects.push_back(std::move(rho));
  }
  return effects;
}

std::vector<CMatrix> pgm_effects_dense(
    const SideView& view, const std::vector<std::vector<int>>& codebook) {
  const std::size_t dim = ipow(std::size_t(view.dim),
                               static_cast<int>(codebook.front().size()));
  CMatrix s(dim, dim);
  for (const auto& word : codebook) accumulate(s, 1.0, product_dense(view, word));
  const EigResult eig = hermitian_eig(s);
  CMatrix root(dim, dim);  // S^{-1/2} on the support
  for (std::size_t k = 0; k < dim; ++k) {
    if (eig.values[k] <= kPinvCut) continue;
    const double f = 1.0 / std::sqrt(eig.values[k]);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        root(i, j) += f * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
  }
  std::vector<CMatrix> effects;
  effects.reserve(codebook.size());
  for (const auto& word : codebook)
    effects.push_back(root * product_dense(view, word) * root);
  return effects;
}

}  // namespace

Povm pgm_povm(const std::vector<std::vector<int>>& codebook,
              const CqChannel& channel_b, int n, const ResourceCaps& caps) {
  if (codebook.empty()) throw ValidationError("pgm_povm: empty codebook");
  for (const auto& w : codebook)
    if (static_cast<int>(w.size()) != n)
      throw ValidationError("pgm_povm: codeword length differs from n");
  SideView view = channel_side_view(channel_b);
  const std::size_t dim = ipow(std::size_t(view.dim), n);
  if ((codebook.size() + 1) * dim * dim > caps.dense_budget)
    throw ResourceError("pgm_povm: dense effects exceed the cap");

  std::vector<CMatrix> effects;
  if (view.diagonal) {
    for (const auto& d : pgm_effects_diag(view, codebook)) {
      CMatrix m(dim, dim);
      for (std::size_t i = 0; i < dim; ++i) m(i, i) = d[i];
      effects.push_back(std::move(m));
    }
  } else {
    effects = pgm_effects_dense(view, codebook);
  }
  CMatrix remainder = CMatrix::identity(dim);
  for (const auto& e : effects) accumulate(remainder, -1.0, e);
  // Numerical cleanup: the remainder is the complement-of-support projector.
  for (auto& v : remainder.a)
    if (std::abs(v) < 1e-12) v = 0.0;
  effects.push_back(std::move(remainder));
  return Povm::make(std::move(effects), true);
}

double pgm_average_error(const Povm& povm,
                         const std::vector<std::vector<int>>& codebook,
                         const CqChannel& channel_b, int n) {
  SideView view = channel_side_view(channel_b);
  double good = 0.0;
  for (std::size_t m = 0; m < codebook.size(); ++m) {
    if (static_cast<int>(codebook[m].size()) != n)
      throw ValidationError("pgm_average_error: codeword length mismatch");
    const CMatrix rho = product_dense(view, codebook[m]);
    good += effect_overlap_dense(povm.effects[m], rho);
  }
  return 1.0 - good / double(codebook.size());
}

// ---------------------------------------------------------------------------
// Random binning

namespace {

double chi_of(const ClassicalDistribution& q, const CqChannel& ch) {
  return holevo_chi(q, ch);
}

struct SourceChi {
  std::vector<CqChannel> b_channels, e_channels;

  double chi_b(const ClassicalDistribution& q) const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& ch : b_channels) v = std::min(v, chi_of(q, ch));
    return v;
  }
  double chi_e(const ClassicalDistribution& q) const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& ch : e_channels) v = std::max(v, chi_of(q, ch));
    return v;
  }
};

SourceChi make_source_chi(const CompoundSource& source) {
  SourceChi sc;
  for (const auto& member : source.states) {
    sc.b_channels.push_back(restrict_to_b(member));
    sc.e_channels.push_back(restrict_to_e(member));
  }
  return sc;
}

std::vector<int> sample_type_word(Rng& rng, const TypeClass& lambda) {
  std::vector<int> remaining = lambda.counts;
  int total = lambda.n;
  std::vector<int> word(lambda.n);
  for (int pos = 0; pos < lambda.n; ++pos) {
    std::uint64_t r = rng.uniform_int(std::uint64_t(total));
    for (std::size_t a = 0; a < remaining.size(); ++a) {
      if (r < std::uint64_t(remaining[a])) {
        word[pos] = static_cast<int>(a);
        --remaining[a];
        --total;
        break;
      }
      r -= std::uint64_t(remaining[a]);
    }
  }
  return word;
}

}  // namespace

BinningParams binning_parameters(const CompoundSource& source, int n,
                                 double delta, double eta) {
  if (n < 1) throw ValidationError("binning: n must be >= 1");
  if (delta <= 0.0 || eta <= 0.0)
    throw ValidationError("binning: delta and eta must be > 0");

  const SourceChi sc = make_source_chi(source);
  const auto groups = group_by_sender_marginal(source);

  BinningParams params;
  params.delta = delta;
  params.eta = eta;
  params.rate = std::numeric_limits<double>::infinity();
  for (const auto& g : groups)
    params.rate = std::min(params.rate, sc.chi_b(g.p) - sc.chi_e(g.p));

  for (const auto& lambda : enumerate_types(n, source.alphabet())) {
    const auto dist = lambda.distribution();
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& g : groups) {
      double d = 0.0;
      for (std::size_t y = 0; y < dist.size(); ++y)
        d += std::abs(dist[y] - g.p.probs[y]);
      nearest = std::min(nearest, d);
    }
    if (nearest <= eta) params.retained.push_back(lambda);
  }
  if (params.retained.empty())
    throw ValidationError("binning: no types within eta of the marginals");

  std::vector<double> chi_b_l, chi_e_l;
  double chi_n = std::numeric_limits<double>::infinity();
  for (const auto& lambda : params.retained) {
    const ClassicalDistribution lam{lambda.distribution()};
    const double cb = sc.chi_b(lam), ce = sc.chi_e(lam);
    chi_b_l.push_back(cb);
    chi_e_l.push_back(ce);
    chi_n = std::min(chi_n, cb - ce);
  }

  for (std::size_t i = 0; i < params.retained.size(); ++i) {
    const double h = shannon_entropy(params.retained[i].distribution());
    const double l_exp = n * (h - chi_b_l[i] + 0.75 * delta);
    const double s_exp =
        n * (chi_e_l[i] + (chi_b_l[i] - chi_e_l[i]) - chi_n + 0.75 * delta);
    params.l_lambda.push_back(std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(std::exp2(l_exp)))));
    params.s_lambda.push_back(std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(std::exp2(s_exp)))));
  }
  if (params.rate - delta > 0.0) {
    params.m = static_cast<std::size_t>(
        std::floor(std::exp2(double(n) * (params.rate - delta))));
    params.m = std::max<std::size_t>(1, params.m);
  } else {
    params.m = 1;
    params.log.push_back("rate below delta; degenerate M = 1");
  }
  return params;
}

BinningResult random_binning_protocol(const CompoundSource& source, int n,
                                      double delta, double eta,
                                      std::uint64_t seed,
                                      const ResourceCaps& caps) {
  BinningParams params = binning_parameters(source, n, delta, eta);
  const int nx = source.alphabet();

  std::size_t l_total = 0;
  for (std::size_t l : params.l_lambda) l_total += l;
  const double word_count = std::pow(double(nx), double(n));
  if (word_count * double(l_total) * double(params.m) >
          double(caps.state_budget) ||
      word_count > double(std::size_t(1) << 22))
    throw ResourceError("binning: protocol exceeds the state budget");
  const std::size_t words = ipow(std::size_t(nx), n);

  // Codewords u^lambda_{l m s}, equidistributed on each type class.
  Rng rng(seed, "binning-codebook");
  struct Cell {
    std::uint32_t lam, l, m, s;
  };
  std::vector<std::vector<Cell>> cells(words);
  std::vector<std::vector<std::vector<int>>> codebooks;  // per (lambda, l)
  std::vector<std::size_t> l_offset(params.retained.size(), 0);
  {
    std::size_t off = 0;
    for (std::size_t li = 0; li < params.retained.size(); ++li) {
      l_offset[li] = off;
      off += params.l_lambda[li];
    }
  }
  for (std::size_t li = 0; li < params.retained.size(); ++li) {
    const auto& lambda = params.retained[li];
    const std::size_t s_count = params.s_lambda[li];
    for (std::size_t l = 0; l < params.l_lambda[li]; ++l) {
      std::vector<std::vector<int>> cb;
      cb.reserve(params.m * s_count);
      for (std::size_t m = 0; m < params.m; ++m)
        for (std::size_t s = 0; s < s_count; ++s) {
          auto word = sample_type_word(rng, lambda);
          cells[word_index(word, nx)].push_back(
              {std::uint32_t(li), std::uint32_t(l), std::uint32_t(m),
               std::uint32_t(s)});
          cb.push_back(std::move(word));
        }
      codebooks.push_back(std::move(cb));
    }
  }

  Protocol proto;
  proto.n = n;
  proto.alphabet = nx;
  proto.l_count = l_total;
  proto.m_count = params.m;
  proto.t_rows.resize(words);

  // Retained-type membership per word.
  std::vector<int> type_index_of(words, -1);
  for (std::size_t w = 0; w < words; ++w) {
    const auto letters = word_letters(w, n, nx);
    const TypeClass t = type_of(letters, nx);
    for (std::size_t li = 0; li < params.retained.size(); ++li)
      if (params.retained[li].counts == t.counts) {
        type_index_of[w] = static_cast<int>(li);
        break;
      }
  }

  std::size_t empty_cells = 0, offgrid_words = 0;
  for (std::size_t w = 0; w < words; ++w) {
    auto& row = proto.t_rows[w];
    if (type_index_of[w] < 0) {
      ++offgrid_words;
      row.push_back({0, 0, 1.0});
      continue;
    }
    const auto& cell = cells[w];
    if (cell.empty()) {
      ++empty_cells;
      row.push_back({std::uint32_t(l_offset[type_index_of[w]]), 0, 1.0});
      continue;
    }
    // Aggregate 1/|A| over the s coordinate per (l, m).
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> agg;
    const double unit = 1.0 / double(cell.size());
    for (const auto& c : cell)
      agg[{std::uint32_t(l_offset[c.lam] + c.l), c.m}] += unit;
    for (const auto& [key, wgt] : agg) row.push_back({key.first, key.second, wgt});
  }
  if (empty_cells > 0)
    params.log.push_back("empty binning cells routed to (l,m)=(1,1): " +
                         std::to_string(empty_cells) + " words");
  if (offgrid_words > 0)
    params.log.push_back("words outside the retained types routed to (1,1): " +
                         std::to_string(offgrid_words));

  // Decoders: per-(lambda, l) square-root measurement against the averaged
  // B channel, effects summed over s, completed on the first key value.
  CqChannel avg_b = [&] {
    const SourceChi sc = make_source_chi(source);
    std::vector<DensityMatrix> outs;
    const std::size_t d = sc.b_channels.front().out_dim();
    for (int x = 0; x < nx; ++x) {
      CMatrix m(d, d);
      for (const auto& ch : sc.b_channels)
        accumulate(m, 1.0 / double(sc.b_channels.size()), ch.outputs[x].m);
      outs.push_back(
          DensityMatrix{std::move(m), sc.b_channels.front().out_dims});
    }
    return CqChannel::make(std::move(outs));
  }();
  params.log.push_back(
      "decoders: square-root measurement on the averaged B channel; effects "
      "summed over s");

  const SideView bview = channel_side_view(avg_b);
  const std::size_t bdim = ipow(std::size_t(bview.dim), n);
  if (!bview.diagonal && l_total * params.m * bdim * bdim > caps.dense_budget)
    throw ResourceError("binning: dense decoders exceed the cap");
  if (bview.diagonal && l_total * params.m * bdim > caps.dense_budget)
    throw ResourceError("binning: decoders exceed the cap");

  std::size_t cb_index = 0;
  for (std::size_t li = 0; li < params.retained.size(); ++li) {
    const std::size_t s_count = params.s_lambda[li];
    for (std::size_t l = 0; l < params.l_lambda[li]; ++l, ++cb_index) {
      const auto& cb = codebooks[cb_index];
      DecoderSet dec;
      if (bview.diagonal) {
        dec.diagonal = true;
        dec.diag.assign(params.m, std::vector<double>(bdim, 0.0));
        const auto effects = pgm_effects_diag(bview, cb);
        for (std::size_t idx = 0; idx < cb.size(); ++idx) {
          const std::size_t m = idx / s_count;
          for (std::size_t i = 0; i < bdim; ++i)
            dec.diag[m][i] += effects[idx][i];
        }
        for (std::size_t i = 0; i < bdim; ++i) {
          double sum = 0.0;
          for (std::size_t m = 0; m < params.m; ++m) sum += dec.diag[m][i];
          dec.diag[0][i] += 1.0 - sum;  // complete on the first key value
        }
      } else {
        dec.dense.assign(params.m, CMatrix(bdim, bdim));
        const auto effects = pgm_effects_dense(bview, cb);
        for (std::size_t idx = 0; idx < cb.size(); ++idx)
          accumulate(dec.dense[idx / s_count], 1.0, effects[idx]);
        CMatrix deficiency = CMatrix::identity(bdim);
        for (std::size_t m = 0; m < params.m; ++m)
          accumulate(deficiency, -1.0, dec.dense[m]);
        accumulate(dec.dense[0], 1.0, deficiency);
      }
      proto.decoders.push_back(std::move(dec));
    }
  }

  proto.validate();
  return {std::move(proto), std::move(params)};
}

ConversionResult constant_composition_convert(
    const std::vector<std::vector<int>>& codebook, const TypeClass& lambda,
    double theta) {
  if (theta <= 0.0 || theta >= 1.0)
    throw ValidationError("constant_composition_convert: theta in (0,1)");
  if (codebook.empty())
    throw ValidationError("constant_composition_convert: empty codebook");
  const int n = lambda.n;
  const int nx = static_cast<int>(lambda.counts.size());

  ConversionResult res;
  const double scaled = theta * std::pow(double(n + 1), -double(nx)) *
                        double(codebook.size());
  res.m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(scaled)));

  for (const auto& word : codebook) {
    if (res.codebook.size() >= res.m) break;
    if (type_of(word, nx).counts == lambda.counts) res.codebook.push_back(word);
  }
  if (res.codebook.size() < res.m) {
    res.fallback = true;
    // Designated typical word: letters in nondecreasing order.
    std::vector<int> designated;
    for (int a = 0; a < nx; ++a)
      designated.insert(designated.end(), lambda.counts[a], a);
    while (res.codebook.size() < res.m) res.codebook.push_back(designated);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Two-phase estimation protocol

int classify_to_grid(const TypeClass& observed, int grid_k) {
  const auto grid = enumerate_types(grid_k, int(observed.counts.size()));
  const auto obs = observed.distribution();
  double best = std::numeric_limits<double>::infinity();
  int best_idx = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto cell = grid[g].distribution();
    double d = 0.0;
    for (std::size_t y = 0; y < obs.size(); ++y) d += std::abs(obs[y] - cell[y]);
    if (d < best - 1e-15) {
      best = d;
      best_idx = static_cast<int>(g);
    }
  }
  return best_idx;
}

Protocol two_phase_protocol(const CompoundSource& source, int n,
                            const TwoPhaseSpec& spec,
                            const ResourceCaps& caps) {
  if (n < 4) throw ValidationError("two_phase_protocol: n must be >= 4");
  if (spec.per_cell.empty())
    throw ValidationError("two_phase_protocol: no per-type protocols");
  const int a_n = static_cast<int>(std::ceil(std::sqrt(double(n))));
  const int b_n = n - a_n;
  const int nx = source.alphabet();

  std::size_t m_count = 0;
  for (const auto& [cell, proto] : spec.per_cell) {
    if (proto.n != b_n)
      throw ValidationError("two_phase_protocol: cell protocol blocklength "
                            "must equal n - ceil(sqrt(n))");
    if (proto.alphabet != nx)
      throw ValidationError("two_phase_protocol: alphabet mismatch");
    if (m_count == 0)
      m_count = proto.m_count;
    else if (proto.m_count != m_count)
      throw ValidationError("two_phase_protocol: cell protocols disagree on M");
  }

  // Public label space: (cell, l) for the cells present.
  std::map<int, std::size_t> l_offset;
  std::size_t l_total = 0;
  for (const auto& [cell, proto] : spec.per_cell) {
    l_offset[cell] = l_total;
    l_total += proto.l_count;
  }

  const double word_count = std::pow(double(nx), double(n));
  if (word_count * double(l_total) * double(m_count) >
          double(caps.state_budget) ||
      word_count > double(std::size_t(1) << 22))
    throw ResourceError("two_phase_protocol: exceeds the state budget");
  const std::size_t words = ipow(std::size_t(nx), n);

  Protocol proto;
  proto.n = n;
  proto.alphabet = nx;
  proto.l_count = l_total;
  proto.m_count = m_count;
  proto.t_rows.resize(words);

  const std::size_t suffix_words = ipow(std::size_t(nx), b_n);
  std::vector<int> cell_of_prefix(ipow(std::size_t(nx), a_n));
  for (std::size_t wp = 0; wp < cell_of_prefix.size(); ++wp) {
    const auto letters = word_letters(wp, a_n, nx);
    cell_of_prefix[wp] = classify_to_grid(type_of(letters, nx), spec.grid_k);
  }

  for (std::size_t wp = 0; wp < cell_of_prefix.size(); ++wp) {
    const int cell = cell_of_prefix[wp];
    const auto it = spec.per_cell.find(cell);
    if (it == spec.per_cell.end())
      throw ValidationError(
          "two_phase_protocol: missing per-type protocol for reachable cell " +
          std::to_string(cell));
    const Protocol& sub = it->second;
    const std::uint32_t off = static_cast<std::uint32_t>(l_offset.at(cell));
    for (std::size_t ws = 0; ws < suffix_words; ++ws) {
      auto& row = proto.t_rows[wp * suffix_words + ws];
      for (const auto& e : sub.t_rows[ws]) row.push_back({off + e.l, e.m, e.w});
    }
  }

  // Decoders: identity on the estimation block, the cell decoder on the rest.
  const std::size_t db_a = ipow(std::size_t(source.dim_b()), a_n);
  for (const auto& [cell, sub] : spec.per_cell) {
    for (const auto& dec : sub.decoders) {
      DecoderSet lifted;
      if (dec.diagonal) {
        lifted.diagonal = true;
        for (const auto& eff : dec.diag) {
          std::vector<double> big(db_a * eff.size());
          std::size_t k = 0;
          for (std::size_t i = 0; i < db_a; ++i)
            for (double v : eff) big[k++] = v;
          lifted.diag.push_back(std::move(big));
        }
      } else {
        const std::size_t dim = db_a * dec.dim();
        if (m_count * dim * dim > caps.dense_budget)
          throw ResourceError("two_phase_protocol: dense decoders exceed cap");
        for (const auto& eff : dec.dense)
          lifted.dense.push_back(kron(CMatrix::identity(db_a), eff));
      }
      proto.decoders.push_back(std::move(lifted));
    }
  }
  proto.validate();
  return proto;
}

EstimationReport estimation_error(const ClassicalDistribution& p, int grid_k,
                                  int a) {
  EstimationReport rep;
  const int nx = static_cast<int>(p.size());
  const auto grid = enumerate_types(grid_k, nx);
  for (const auto& t : enumerate_types(a, nx)) {
    const int cell = classify_to_grid(t, grid_k);
    const auto center = grid[cell].distribution();
    double dev = 0.0;
    for (int y = 0; y < nx; ++y)
      dev = std::max(dev, std::abs(center[y] - p.probs[y]));
    if (dev > 1.0 / double(grid_k) + 1e-12)
      rep.misclass_prob += type_class_probability(p, t);
  }
  rep.bound = std::exp2(-double(a) * (2.0 / std::log(2.0)) /
                        (double(grid_k) * double(grid_k)));
  return rep;
}

// ---------------------------------------------------------------------------
// Concentration experiments

MatrixChernovReport matrix_chernov_experiment(
    const CqChannel& w, const TypeClass& lambda, int n,
    const std::vector<std::size_t>& m_list, double eps, double delta,
    int trials, std::uint64_t seed, int threads) {
  if (lambda.n != n)
    throw ValidationError("matrix_chernov_experiment: type length != n");
  const int nx = w.alphabet_size;
  const std::size_t words = ipow(std::size_t(nx), n);
  const SideView view = channel_side_view(w);
  const std::size_t dim = ipow(std::size_t(view.dim), n);
  if (words > (std::size_t(1) << 20) || dim > 1024)
    throw ResourceError("matrix_chernov_experiment: dimensions exceed caps");

  // Type-class average sigma_{n,lambda}(W).
  CMatrix sigma(dim, dim);
  std::size_t class_size = 0;
  for (std::size_t word = 0; word < words; ++word) {
    const auto letters = word_letters(word, n, nx);
    if (type_of(letters, nx).counts != lambda.counts) continue;
    ++class_size;
    accumulate(sigma, 1.0, product_dense(view, letters));
  }
  sigma = (1.0 / double(class_size)) * sigma;

  const double chi = holevo_chi(
      ClassicalDistribution{lambda.distribution()}, w);
  const double delta_n =
      -std::exp2(-double(n) * (chi - delta)) / (288.0 * std::log(2.0));

  MatrixChernovReport rep;
  for (std::size_t mi = 0; mi < m_list.size(); ++mi) {
    const std::size_t m = m_list[mi];
    std::vector<int> deviated(trials, 0);
    parallel_for(std::size_t(trials), threads, [&](std::size_t trial) {
      Rng rng(seed, "matrix-chernov", mi * std::size_t(trials) + trial);
      CMatrix avg(dim, dim);
      for (std::size_t j = 0; j < m; ++j) {
        const auto word = sample_type_word(rng, lambda);
        accumulate(avg, 1.0 / double(m), product_dense(view, word));
      }
      deviated[trial] = trace_norm_distance(avg, sigma) >= eps ? 1 : 0;
    });
    int count = 0;
    for (int d : deviated) count += d;
    ChernovRow row;
    row.m = m;
    row.empirical = double(count) / double(trials);
    row.bound =
        2.0 * std::pow(double(view.dim), double(n)) *
        std::exp2(-double(m) * delta_n * eps);
    rep.rows.push_back(row);
  }
  rep.non_increasing = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].empirical > rep.rows[i - 1].empirical + 1e-12)
      rep.non_increasing = false;
  return rep;
}

ClassicalChernovReport classical_chernov_experiment(int n, double delta,
                                                    double mean, int trials,
                                                    std::uint64_t seed) {
  if (n < 1 || trials < 1)
    throw ValidationError("classical_chernov_experiment: bad n or trials");
  if (mean < 0.0 || mean > 1.0 || delta < 0.0)
    throw ValidationError("classical_chernov_experiment: bad parameters");
  Rng rng(seed, "classical-chernov");
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    int sum = 0;
    for (int i = 0; i < n; ++i) sum += rng.next_double() < mean ? 1 : 0;
    if (double(sum) / double(n) <= (1.0 - delta) * mean) ++hits;
  }
  ClassicalChernovReport rep;
  rep.empirical = double(hits) / double(trials);
  rep.bound = std::exp2(-double(n) * delta * delta * mean * mean /
                        std::log(2.0));
  rep.holds = rep.empirical <= rep.bound;
  return rep;
}

double protocol_converse_bound(const CompoundSource& source,
                               const ProtocolReport& report, int z, int zprime,
                               std::uint64_t seed, int restarts) {
  OptimizerOptions opts;
  opts.restarts = restarts;
  opts.seed = seed;
  // The bound only needs a sound lower estimate of the rate; a shallow
  // search keeps repeated converse checks cheap.
  opts.max_sweeps = 60;
  opts.min_improvement = 1e-5;
  const double mu = std::min(1.0, report.worst_case);
  return converse_value(source, report.n, mu, report.log_m, z, zprime, opts);
}

}  // namespace cqq
