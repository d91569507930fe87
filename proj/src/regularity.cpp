#include "cqq/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cqq/entropy.hpp"
#include "cqq/errors.hpp"
#include "cqq/parallel.hpp"
#include "cqq/rates.hpp"
#include "cqq/rng.hpp"

namespace cqq {

HausdorffReport hausdorff_distance(const std::vector<DensityMatrix>& a,
                                   const std::vector<DensityMatrix>& b) {
  if (a.empty() || b.empty())
    throw ValidationError("hausdorff_distance: empty set");
  if (a.front().dim() != b.front().dim())
    throw ValidationError("hausdorff_distance: dimension mismatch");

  std::vector<std::vector<double>> d(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      d[i][j] = trace_norm_distance(a[i], b[j]);

  HausdorffReport rep;
  for (int dir = 0; dir < 2; ++dir) {
    const std::size_t outer = dir == 0 ? a.size() : b.size();
    const std::size_t inner = dir == 0 ? b.size() : a.size();
    for (std::size_t i = 0; i < outer; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < inner; ++j) {
        const double v = dir == 0 ? d[i][j] : d[j][i];
        if (v < best) {
          best = v;
          best_j = j;
        }
      }
      if (best > rep.distance) {
        rep.distance = best;
        rep.witness_from = static_cast<int>(i);
        rep.witness_to = static_cast<int>(best_j);
        rep.direction = dir;
      }
    }
  }
  return rep;
}

std::vector<ModulusRow> regularity_modulus(const CompoundSource& source,
                                           const std::vector<double>& deltas) {
  const auto groups = group_by_sender_marginal(source);
  struct PairEntry {
    double pdist;
    double sum;
  };
  std::vector<PairEntry> pairs;
  std::vector<MarginalSets> sets;
  sets.reserve(groups.size());
  for (const auto& g : groups) sets.push_back(marginal_sets(source, g));
  for (std::size_t i = 0; i < groups.size(); ++i)
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const double pd = l1_distance(groups[i].p, groups[j].p);
      const double sum = hausdorff_distance(sets[i].ab, sets[j].ab).distance +
                         hausdorff_distance(sets[i].ae, sets[j].ae).distance;
      pairs.push_back({pd, sum});
    }

  std::vector<ModulusRow> rows;
  for (double delta : deltas) {
    double modulus = 0.0;
    for (const auto& pr : pairs)
      if (pr.pdist < delta) modulus = std::max(modulus, pr.sum);
    rows.push_back({delta, modulus});
  }
  return rows;
}

TensorPowerHausdorffReport tensor_power_hausdorff_check(
    const std::vector<DensityMatrix>& a, const std::vector<DensityMatrix>& b,
    int n, std::size_t dim_cap) {
  if (n < 1) throw ValidationError("tensor power must be >= 1");
  const double powered = std::pow(double(a.front().dim()), double(n));
  if (powered > double(dim_cap))
    throw ResourceError("tensor_power_hausdorff_check: dimension cap exceeded");

  auto powers = [n](const std::vector<DensityMatrix>& set) {
    std::vector<DensityMatrix> out;
    out.reserve(set.size());
    for (const auto& rho : set) out.push_back(tensor_power(rho, n));
    return out;
  };
  TensorPowerHausdorffReport rep;
  rep.lhs = hausdorff_distance(powers(a), powers(b)).distance;
  rep.rhs = double(n) * hausdorff_distance(a, b).distance;
  rep.holds = rep.lhs <= rep.rhs + 1e-10;
  return rep;
}

CubeCovering cube_cover_decompose(const CompoundSource& source, double delta) {
  if (delta <= 0.0) throw ValidationError("cube cover: delta must be > 0");

  std::vector<std::vector<double>> embedded;
  for (const auto& s : source.states) {
    const CMatrix m = coherify(s).m;
    std::vector<double> v;
    v.reserve(2 * m.a.size());
    for (const cplx& z : m.a) v.push_back(z.real());
    for (const cplx& z : m.a) v.push_back(z.imag());
    embedded.push_back(std::move(v));
  }
  const std::size_t edim = embedded.front().size();
  const double width = delta / double(edim);

  // Anchor the grid at the component-wise minimum so the covering is
  // translation-consistent across runs.
  std::vector<double> anchor = embedded.front();
  for (const auto& v : embedded)
    for (std::size_t i = 0; i < edim; ++i) anchor[i] = std::min(anchor[i], v[i]);

  CubeCovering cov;
  cov.cell_width = width;
  cov.assignment.resize(source.size());
  std::vector<std::vector<long long>> cells;
  for (std::size_t s = 0; s < embedded.size(); ++s) {
    std::vector<long long> cell(edim);
    for (std::size_t i = 0; i < edim; ++i)
      cell[i] =
          static_cast<long long>(std::floor((embedded[s][i] - anchor[i]) / width));
    int id = -1;
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (cells[c] == cell) {
        id = static_cast<int>(c);
        break;
      }
    if (id < 0) {
      id = static_cast<int>(cells.size());
      cells.push_back(std::move(cell));
      cov.subfamilies.emplace_back();
    }
    cov.assignment[s] = id;
    cov.subfamilies[id].push_back(static_cast<int>(s));
  }
  return cov;
}

namespace {

double channel_distance(const CqChannel& v, const CqChannel& w) {
  double d = 0.0;
  for (int x = 0; x < v.alphabet_size; ++x)
    d = std::max(d, trace_norm_distance(v.outputs[x], w.outputs[x]));
  return d;
}

CMatrix word_output(const CqChannel& v, const std::vector<int>& word) {
  CMatrix m = v.outputs[word[0]].m;
  for (std::size_t i = 1; i < word.size(); ++i)
    m = kron(m, v.outputs[word[i]].m);
  return m;
}

}  // namespace

ChannelNetReport channel_net(const std::vector<CqChannel>& v_set, double alpha,
                             int n_check, std::uint64_t seed, int samples) {
  if (alpha <= 0.0 || alpha >= 1.0 / 2.718281828459045)
    throw ValidationError("channel_net: alpha must lie in (0, 1/e)");
  if (v_set.empty()) throw ValidationError("channel_net: empty channel set");

  const int nx = v_set.front().alphabet_size;
  const double dim = double(v_set.front().out_dim());

  ChannelNetReport rep;
  rep.net.push_back(0);
  for (;;) {
    double far = -1.0;
    int far_idx = -1;
    for (std::size_t i = 0; i < v_set.size(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (int j : rep.net)
        nearest = std::min(nearest, channel_distance(v_set[i], v_set[j]));
      if (nearest > far) {
        far = nearest;
        far_idx = static_cast<int>(i);
      }
    }
    if (far <= 2.0 * alpha) break;
    rep.net.push_back(far_idx);
  }

  const double log_bound = 2.0 * nx * dim * dim * std::log2(6.0 / alpha);
  rep.cardinality_bound =
      log_bound > 1000.0 ? std::numeric_limits<double>::infinity()
                         : std::exp2(log_bound);
  rep.cardinality_ok = std::log2(double(rep.net.size())) <= log_bound;

  // Pair every channel with its nearest net member once.
  std::vector<int> nearest_of(v_set.size(), 0);
  for (std::size_t i = 0; i < v_set.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j : rep.net) {
      const double d = channel_distance(v_set[i], v_set[j]);
      if (d < best) {
        best = d;
        nearest_of[i] = j;
      }
    }
  }

  Rng rng(seed, "channel-net");
  rep.cond2_rhs = 2.0 * n_check * alpha;
  for (int s = 0; s < samples; ++s) {
    std::vector<int> word(n_check);
    for (auto& w : word) w = static_cast<int>(rng.uniform_int(nx));
    for (std::size_t i = 0; i < v_set.size(); ++i) {
      const CMatrix lhs = word_output(v_set[i], word);
      const CMatrix rhs = word_output(v_set[nearest_of[i]], word);
      rep.cond2_max_lhs =
          std::max(rep.cond2_max_lhs, trace_norm_distance(lhs, rhs));
    }
  }
  rep.cond2_ok = rep.cond2_max_lhs <= rep.cond2_rhs + 1e-10;

  rep.cond3_rhs = 2.0 * alpha * std::log2(dim / (2.0 * alpha));
  for (int s = 0; s < samples; ++s) {
    const ClassicalDistribution p{rng.dirichlet(nx)};
    double min_net = std::numeric_limits<double>::infinity();
    double min_set = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v_set.size(); ++i)
      min_set = std::min(min_set, holevo_chi(p, v_set[i]));
    for (int j : rep.net) min_net = std::min(min_net, holevo_chi(p, v_set[j]));
    rep.cond3_max_lhs = std::max(rep.cond3_max_lhs, std::abs(min_net - min_set));
  }
  rep.cond3_ok = rep.cond3_max_lhs <= rep.cond3_rhs + 1e-10;
  return rep;
}

namespace {

double clip_half(double x) { return std::min(x, 0.5); }

DensityMatrix random_state_dims(Rng& rng, std::vector<int> dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  CMatrix g(n, n);
  for (auto& v : g.a) v = cplx(rng.gaussian(), rng.gaussian());
  CMatrix rho = g * adjoint(g);
  rho = (1.0 / trace(rho).real()) * rho;
  return DensityMatrix{std::move(rho), std::move(dims)};
}

CqChannel random_channel(Rng& rng, int alphabet, std::vector<int> out_dims) {
  std::vector<DensityMatrix> outs;
  for (int x = 0; x < alphabet; ++x)
    outs.push_back(random_state_dims(rng, out_dims));
  return CqChannel::make(std::move(outs));
}

StochasticMatrix random_stochastic(Rng& rng, int rows, int cols) {
  StochasticMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    const auto col = rng.dirichlet(rows);
    for (int r = 0; r < rows; ++r) m(r, c) = col[r];
  }
  return m;
}

struct CheckAccum {
  int violations = 0;
  double max_margin = -std::numeric_limits<double>::infinity();
  void add(double lhs, double rhs) {
    const double margin = lhs - rhs;
    max_margin = std::max(max_margin, margin);
    if (margin > 1e-9) ++violations;
  }
};

}  // namespace

std::vector<ContinuityRow> continuity_checks(const ContinuityConfig& cfg) {
  std::vector<ContinuityRow> rows;

  // Conditional-entropy continuity on random bipartite qubit pairs.
  {
    CheckAccum acc;
    std::vector<double> margins(std::max(cfg.samples_alicki_fannes, 1));
    parallel_for(cfg.samples_alicki_fannes, cfg.threads, [&](std::size_t i) {
      Rng rng(cfg.seed, "continuity-af", i);
      const auto rho = random_state_dims(rng, {2, 2});
      DensityMatrix sigma = rho;
      if (i % 7 != 0) {
        const auto tau = random_state_dims(rng, {2, 2});
        const double t = rng.next_double();
        CMatrix mix = (1.0 - t) * rho.m;
        accumulate(mix, t, tau.m);
        sigma = DensityMatrix{std::move(mix), {2, 2}};
      }
      const double eps = trace_norm_distance(rho, sigma);
      const double lhs = std::abs(conditional_entropy(rho, {0}, {1}) -
                                  conditional_entropy(sigma, {0}, {1}));
      const double rhs =
          4.0 * eps * std::log2(2.0) + 2.0 * binary_entropy(clip_half(eps));
      margins[i] = lhs - rhs;
    });
    for (int i = 0; i < cfg.samples_alicki_fannes; ++i)
      acc.add(margins[i], 0.0);
    rows.push_back({"conditional-entropy", cfg.samples_alicki_fannes,
                    acc.violations, acc.max_margin});
  }

  // |chi(p,V) - chi(q,V)| against 6 eps log dim + 2 h(eps).
  {
    CheckAccum acc;
    std::vector<double> margins(std::max(cfg.samples_holevo_p, 1));
    parallel_for(cfg.samples_holevo_p, cfg.threads, [&](std::size_t i) {
      Rng rng(cfg.seed, "continuity-holevo-p", i);
      const int ny = 2 + static_cast<int>(rng.uniform_int(2));
      const auto v = random_channel(rng, ny, {2});
      const ClassicalDistribution p{rng.dirichlet(ny)};
      ClassicalDistribution q = p;
      if (i % 5 != 0) {
        const ClassicalDistribution r{rng.dirichlet(ny)};
        const double t = rng.next_double();
        for (int y = 0; y < ny; ++y)
          q.probs[y] = (1.0 - t) * p.probs[y] + t * r.probs[y];
      }
      const double eps = l1_distance(p, q);
      const double lhs = std::abs(holevo_chi(p, v) - holevo_chi(q, v));
      const double rhs =
          6.0 * eps * std::log2(2.0) + 2.0 * binary_entropy(clip_half(eps));
      margins[i] = lhs - rhs;
    });
    for (int i = 0; i < cfg.samples_holevo_p; ++i) acc.add(margins[i], 0.0);
    rows.push_back(
        {"holevo-marginal", cfg.samples_holevo_p, acc.violations, acc.max_margin});
  }

  // Set variant: worst-case chi difference over Hausdorff-close marginal sets.
  {
    CheckAccum acc;
    for (int i = 0; i < cfg.samples_holevo_sets; ++i) {
      Rng rng(cfg.seed, "continuity-holevo-sets", i);
      const int ny = 2;
      std::vector<CqChannel> chans = {random_channel(rng, ny, {2, 2}),
                                      random_channel(rng, ny, {2, 2})};
      std::vector<ClassicalDistribution> qs, qs2;
      for (int k = 0; k < 3; ++k) qs.push_back(ClassicalDistribution{rng.dirichlet(ny)});
      for (int k = 0; k < 3; ++k) {
        ClassicalDistribution shifted = qs[k];
        const ClassicalDistribution r{rng.dirichlet(ny)};
        const double t = 0.5 * rng.next_double();
        for (int y = 0; y < ny; ++y)
          shifted.probs[y] = (1.0 - t) * qs[k].probs[y] + t * r.probs[y];
        qs2.push_back(shifted);
      }
      auto dist_hausdorff = [](const std::vector<ClassicalDistribution>& x,
                               const std::vector<ClassicalDistribution>& y) {
        double dmax = 0.0;
        for (int dir = 0; dir < 2; ++dir) {
          const auto& from = dir == 0 ? x : y;
          const auto& to = dir == 0 ? y : x;
          for (const auto& f : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& g : to) best = std::min(best, l1_distance(f, g));
            dmax = std::max(dmax, best);
          }
        }
        return dmax;
      };
      auto objective = [&](const std::vector<ClassicalDistribution>& set) {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& q : set) {
          double minb = std::numeric_limits<double>::infinity();
          double maxe = -std::numeric_limits<double>::infinity();
          for (const auto& ch : chans) {
            std::vector<DensityMatrix> bouts, eouts;
            for (const auto& o : ch.outputs) {
              bouts.push_back(partial_trace(o, {0}));
              eouts.push_back(partial_trace(o, {1}));
            }
            minb = std::min(minb, holevo_chi(q, CqChannel::make(bouts)));
            maxe = std::max(maxe, holevo_chi(q, CqChannel::make(eouts)));
          }
          worst = std::min(worst, minb - maxe);
        }
        return worst;
      };
      const double eps = dist_hausdorff(qs, qs2);
      const double lhs = std::abs(objective(qs) - objective(qs2));
      const double rhs = 6.0 * eps * std::log2(4.0) +
                         4.0 * binary_entropy(clip_half(eps));
      acc.add(lhs, rhs);
    }
    rows.push_back({"holevo-set", cfg.samples_holevo_sets, acc.violations,
                    acc.max_margin});
  }

  // Preprocessed conditional mutual information continuity.
  {
    CheckAccum acc;
    std::vector<double> margins(std::max(cfg.samples_cond_mutual, 1));
    parallel_for(cfg.samples_cond_mutual, cfg.threads, [&](std::size_t i) {
      Rng rng(cfg.seed, "continuity-cond-mi", i);
      const int ny = 2, zu = 2, zt = 2, dx = 2;
      const auto va = random_channel(rng, ny, {dx, 1});
      CqChannel vb = va;
      ClassicalDistribution p{rng.dirichlet(ny)};
      ClassicalDistribution q = p;
      if (i % 5 != 0) {
        vb = random_channel(rng, ny, {dx, 1});
        q = ClassicalDistribution{rng.dirichlet(ny)};
        const double t = rng.next_double();
        for (int y = 0; y < ny; ++y) {
          q.probs[y] = (1.0 - t) * p.probs[y] + t * q.probs[y];
          CMatrix mix = (1.0 - t) * va.outputs[y].m;
          accumulate(mix, t, vb.outputs[y].m);
          vb.outputs[y] = DensityMatrix{std::move(mix), {dx, 1}};
        }
      }
      const auto sa = CqqState::make(p, va);
      const auto sb = CqqState::make(q, vb);
      MarkovPreprocessing gamma{random_stochastic(rng, zu, ny),
                                random_stochastic(rng, zt, zu)};
      const double delta =
          trace_norm_distance(coherify(sa), coherify(sb));
      const double lhs = std::abs(preprocessed_infos(sa, gamma).i_ub_given_t -
                                  preprocessed_infos(sb, gamma).i_ub_given_t);
      const double rhs = 8.0 * delta * std::log2(double(zu) * dx) +
                         6.0 * binary_entropy(clip_half(delta));
      margins[i] = lhs - rhs;
    });
    for (int i = 0; i < cfg.samples_cond_mutual; ++i) acc.add(margins[i], 0.0);
    rows.push_back({"conditional-mutual-information", cfg.samples_cond_mutual,
                    acc.violations, acc.max_margin});
  }

  // Mixed-set inequality: swapping channel families costs at most the
  // marginal shift plus the channel-set distance.
  {
    CheckAccum acc;
    for (int i = 0; i < cfg.samples_set_shift; ++i) {
      Rng rng(cfg.seed, "continuity-set-shift", i);
      const int ny = 2;
      auto make_set = [&](const ClassicalDistribution& p,
                          const std::vector<CqChannel>& chans) {
        std::vector<DensityMatrix> out;
        for (const auto& ch : chans) {
          const auto st = CqqState::make(
              p, CqChannel::make(ch.outputs));
          out.push_back(coherify(st));
        }
        return out;
      };
      std::vector<CqChannel> vp, vq;
      for (int k = 0; k < 2; ++k) vp.push_back(random_channel(rng, ny, {2, 1}));
      for (int k = 0; k < 2; ++k) vq.push_back(random_channel(rng, ny, {2, 1}));
      const ClassicalDistribution p{rng.dirichlet(ny)};
      const ClassicalDistribution q{rng.dirichlet(ny)};
      const double lhs =
          hausdorff_distance(make_set(p, vp), make_set(p, vq)).distance;
      const double rhs =
          hausdorff_distance(make_set(p, vp), make_set(q, vq)).distance +
          l1_distance(p, q);
      acc.add(lhs, rhs);
    }
    rows.push_back({"mixed-set-shift", cfg.samples_set_shift, acc.violations,
                    acc.max_margin});
  }

  return rows;
}

}  // namespace cqq
