#include "cqq/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cqq/entropy.hpp"
#include "cqq/errors.hpp"
#include "cqq/parallel.hpp"
#include "cqq/rng.hpp"

namespace cqq {

StochasticMatrix StochasticMatrix::identity_like(int rows, int cols) {
  StochasticMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c) m(c % rows, c) = 1.0;
  return m;
}

StochasticMatrix StochasticMatrix::constant(int rows, int cols,
                                            int target_row) {
  StochasticMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c) m(target_row, c) = 1.0;
  return m;
}

StochasticMatrix StochasticMatrix::deterministic(
    const std::vector<int>& row_of_col, int rows) {
  StochasticMatrix m(rows, static_cast<int>(row_of_col.size()));
  for (int c = 0; c < m.cols; ++c) m(row_of_col[c], c) = 1.0;
  return m;
}

void StochasticMatrix::validate() const {
  if (rows < 1 || cols < 1)
    throw ValidationError("stochastic matrix must be nonempty");
  for (int c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (int r = 0; r < rows; ++r) {
      if ((*this)(r, c) < 0.0)
        throw ValidationError("stochastic matrix has a negative entry");
      sum += (*this)(r, c);
    }
    if (std::abs(sum - 1.0) > 1e-10)
      throw ValidationError("stochastic matrix column does not sum to 1");
  }
}

void MarkovPreprocessing::validate() const {
  p_u_given_y.validate();
  p_t_given_u.validate();
  if (p_t_given_u.cols != p_u_given_y.rows)
    throw ValidationError("preprocessing alphabets do not chain");
}

DensityMatrix apply_preprocessing(const CqqState& state,
                                  const MarkovPreprocessing& gamma) {
  gamma.validate();
  if (gamma.p_u_given_y.cols != state.alphabet())
    throw ValidationError("preprocessing does not match source alphabet");
  const int z = gamma.z(), zp = gamma.zprime();
  const std::size_t dbe = state.channel.out_dim();
  const std::size_t dim = std::size_t(zp) * z * dbe;
  CMatrix m(dim, dim);
  for (int t = 0; t < zp; ++t)
    for (int u = 0; u < z; ++u) {
      CMatrix block(dbe, dbe);
      for (int y = 0; y < state.alphabet(); ++y) {
        const double w =
            gamma.p_t_given_u(t, u) * gamma.p_u_given_y(u, y) * state.p.probs[y];
        if (w > 0.0) accumulate(block, w, state.channel.outputs[y].m);
      }
      const std::size_t base = (std::size_t(t) * z + u) * dbe;
      for (std::size_t i = 0; i < dbe; ++i)
        for (std::size_t j = 0; j < dbe; ++j)
          m(base + i, base + j) = block(i, j);
    }
  return DensityMatrix{std::move(m),
                       {zp, z, state.dim_b(), state.dim_e()}};
}

namespace {

// Channel restrictions of one member, ready for repeated objective
// evaluations.
struct MemberView {
  std::vector<double> p;
  std::vector<CMatrix> vb, ve;
};

MemberView make_view(const CqqState& s) {
  MemberView v;
  v.p = s.p.probs;
  for (const auto& out : s.channel.outputs) {
    v.vb.push_back(partial_trace(out, {0}).m);
    v.ve.push_back(partial_trace(out, {1}).m);
  }
  return v;
}

// I(U;X|T) = sum_t P(t) S(rho_{X|t}) - sum_u q(u) S(rho_{X|u}) for the
// chain T <- U <- Y; only |T| + |U| small eigenproblems per side.
double cond_info(const std::vector<double>& p, const std::vector<CMatrix>& vx,
                 const MarkovPreprocessing& g) {
  const int z = g.z(), zp = g.zprime(), ny = static_cast<int>(p.size());
  const std::size_t d = vx.front().rows;

  std::vector<double> q(z, 0.0);
  std::vector<CMatrix> mix_u(z);
  for (int u = 0; u < z; ++u) mix_u[u] = CMatrix(d, d);
  for (int y = 0; y < ny; ++y) {
    if (p[y] == 0.0) continue;
    for (int u = 0; u < z; ++u) {
      const double w = g.p_u_given_y(u, y) * p[y];
      if (w > 0.0) {
        q[u] += w;
        accumulate(mix_u[u], w, vx[y]);
      }
    }
  }

  double sum_u = 0.0;
  for (int u = 0; u < z; ++u) {
    if (q[u] <= 0.0) continue;
    sum_u += q[u] * von_neumann_entropy((1.0 / q[u]) * mix_u[u]);
  }

  double sum_t = 0.0;
  for (int t = 0; t < zp; ++t) {
    double pt = 0.0;
    CMatrix mix_t(d, d);
    for (int u = 0; u < z; ++u) {
      const double w = g.p_t_given_u(t, u) * q[u];
      if (w > 0.0) {
        pt += w;
        accumulate(mix_t, g.p_t_given_u(t, u), mix_u[u]);
      }
    }
    if (pt <= 0.0) continue;
    sum_t += pt * von_neumann_entropy((1.0 / pt) * mix_t);
  }
  const double info = sum_t - sum_u;
  return info < 0.0 && info > -1e-12 ? 0.0 : info;
}

double view_objective(const std::vector<MemberView>& members,
                      const MarkovPreprocessing& g) {
  double min_b = std::numeric_limits<double>::infinity();
  double max_e = -std::numeric_limits<double>::infinity();
  for (const auto& m : members) {
    min_b = std::min(min_b, cond_info(m.p, m.vb, g));
    max_e = std::max(max_e, cond_info(m.p, m.ve, g));
  }
  return min_b - max_e;
}

MarkovPreprocessing random_gamma(Rng& rng, int z, int zp, int ny) {
  MarkovPreprocessing g{StochasticMatrix(z, ny), StochasticMatrix(zp, z)};
  for (int y = 0; y < ny; ++y) {
    const auto col = rng.dirichlet(z);
    for (int u = 0; u < z; ++u) g.p_u_given_y(u, y) = col[u];
  }
  for (int u = 0; u < z; ++u) {
    const auto col = rng.dirichlet(zp);
    for (int t = 0; t < zp; ++t) g.p_t_given_u(t, u) = col[t];
  }
  return g;
}

struct Ascent {
  double value = 0.0;
  MarkovPreprocessing gamma;
  int sweeps = 0;
};

// Derivative-free coordinate ascent: pull single columns toward vertices of
// their simplex, halving the step when a full sweep stalls.
Ascent coordinate_ascent(const std::vector<MemberView>& members,
                         MarkovPreprocessing g, const OptimizerOptions& opts,
                         long long& evals) {
  auto spend = [&]() {
    ++evals;
    return opts.eval_budget < 0 || evals <= opts.eval_budget;
  };

  Ascent a;
  a.gamma = std::move(g);
  if (!spend()) return a;
  a.value = view_objective(members, a.gamma);

  double step = 1.0;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    a.sweeps = sweep + 1;
    double sweep_gain = 0.0;
    for (int which = 0; which < 2; ++which) {
      StochasticMatrix& m = which == 0 ? a.gamma.p_u_given_y
                                       : a.gamma.p_t_given_u;
      for (int c = 0; c < m.cols; ++c) {
        for (int r = 0; r < m.rows; ++r) {
          StochasticMatrix trial = m;
          for (int k = 0; k < m.rows; ++k)
            trial(k, c) = (1.0 - step) * m(k, c) + (k == r ? step : 0.0);
          std::swap(m, trial);
          if (!spend()) {
            std::swap(m, trial);
            return a;
          }
          const double v = view_objective(members, a.gamma);
          if (v > a.value + 1e-12) {
            sweep_gain += v - a.value;
            a.value = v;
          } else {
            std::swap(m, trial);  // revert
          }
        }
      }
    }
    if (sweep_gain < opts.min_improvement) {
      step *= 0.5;
      if (step < 1e-3) break;
    }
  }
  return a;
}

std::vector<MarkovPreprocessing> structured_starts(
    const std::vector<MemberView>& members, int z, int zp, int ny,
    std::uint64_t seed, const OptimizerOptions& opts, long long& evals) {
  std::vector<MarkovPreprocessing> starts;
  // A constant T keeps the conditioning trivial; T = U would erase all of
  // I(U;B|T), so the useful deterministic starts pair U maps with it.
  const auto tid = StochasticMatrix::constant(zp, z);
  starts.push_back({StochasticMatrix::identity_like(z, ny), tid});
  starts.push_back({StochasticMatrix::identity_like(z, ny),
                    StochasticMatrix::identity_like(zp, z)});
  starts.push_back({StochasticMatrix::constant(z, ny), tid});

  // Deterministic U-maps, screened by a single evaluation each; exhaustive
  // when the map space is small, sampled otherwise.
  std::vector<std::vector<int>> maps;
  const double total = std::pow(double(z), double(ny));
  if (total <= 4096.0) {
    std::vector<int> map(ny, 0);
    for (;;) {
      maps.push_back(map);
      int pos = ny - 1;
      while (pos >= 0 && ++map[pos] == z) map[pos--] = 0;
      if (pos < 0) break;
    }
  } else {
    Rng rng(seed, "rate-det-maps");
    for (int i = 0; i < 128; ++i) {
      std::vector<int> map(ny);
      for (auto& v : map) v = static_cast<int>(rng.uniform_int(z));
      maps.push_back(std::move(map));
    }
  }
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    MarkovPreprocessing g{StochasticMatrix::deterministic(maps[i], z), tid};
    ++evals;
    scored.emplace_back(view_objective(members, g), i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  const std::size_t keep = std::min<std::size_t>(6, scored.size());
  for (std::size_t i = 0; i < keep; ++i)
    starts.push_back({StochasticMatrix::deterministic(maps[scored[i].second], z),
                      tid});
  for (const auto& w : opts.warm_starts) {
    if (w.z() == z && w.zprime() == zp && w.p_u_given_y.cols == ny)
      starts.push_back(w);
  }
  return starts;
}

}  // namespace

PreprocessedInfos preprocessed_infos(const CqqState& state,
                                     const MarkovPreprocessing& gamma) {
  gamma.validate();
  const MemberView v = make_view(state);
  return {cond_info(v.p, v.vb, gamma), cond_info(v.p, v.ve, gamma)};
}

double group_objective(const CompoundSource& source, const MarginalGroup& group,
                       const MarkovPreprocessing& gamma) {
  gamma.validate();
  if (group.members.empty()) throw ValidationError("empty marginal group");
  std::vector<MemberView> views;
  for (int idx : group.members) views.push_back(make_view(source.states[idx]));
  return view_objective(views, gamma);
}

RateResult optimize_k1(const CompoundSource& source, int z, int zprime,
                       const OptimizerOptions& opts) {
  if (z < 1 || zprime < 1)
    throw ValidationError("optimize_k1: z and zprime must be >= 1");
  const int ny = source.alphabet();
  const auto groups = group_by_sender_marginal(source);

  RateResult result;
  result.value = std::numeric_limits<double>::infinity();
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& group = groups[gi];
    std::vector<MemberView> views;
    for (int idx : group.members) views.push_back(make_view(source.states[idx]));

    long long evals = 0;
    GroupRate gr;
    gr.p = group.p;
    gr.value = -std::numeric_limits<double>::infinity();

    const auto starts =
        structured_starts(views, z, zprime, ny, opts.seed, opts, evals);
    std::vector<Ascent> outcomes(starts.size() + std::size_t(opts.restarts));
    std::vector<long long> spent(outcomes.size(), 0);

    parallel_for(outcomes.size(), opts.threads, [&](std::size_t i) {
      long long local = 0;
      MarkovPreprocessing g0;
      if (i < starts.size()) {
        g0 = starts[i];
      } else {
        Rng rng(opts.seed, "rate-restart", i - starts.size());
        g0 = random_gamma(rng, z, zprime, ny);
      }
      OptimizerOptions local_opts = opts;
      if (opts.eval_budget >= 0)
        local_opts.eval_budget =
            std::max<long long>(1, opts.eval_budget /
                                       static_cast<long long>(outcomes.size()));
      outcomes[i] = coordinate_ascent(views, std::move(g0), local_opts, local);
      spent[i] = local;
    });

    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      evals += spent[i];
      const std::string label =
          i < starts.size() ? "structured-" + std::to_string(i)
                            : "restart-" + std::to_string(i - starts.size());
      gr.trace.push_back({label, outcomes[i].sweeps, outcomes[i].value});
      if (outcomes[i].value > gr.value) {
        gr.value = outcomes[i].value;
        gr.best = outcomes[i].gamma;
      }
    }
    gr.evaluations = evals;
    if (opts.eval_budget >= 0 && evals >= opts.eval_budget)
      result.converged = false;
    // The constant chain scores an exact zero, so anything this small is
    // evaluation noise around a zero-rate group.
    if (std::abs(gr.value) < 1e-11) gr.value = 0.0;
    result.value = std::min(result.value, gr.value);
    result.per_group.push_back(std::move(gr));
  }
  result.value = std::max(0.0, result.value);
  return result;
}

namespace {

// Product chain on Y^2 from a single-letter chain; pads unused symbols.
MarkovPreprocessing product_gamma(const MarkovPreprocessing& g, int z2,
                                  int zp2, int ny) {
  const int z1 = g.z(), zp1 = g.zprime();
  MarkovPreprocessing out{StochasticMatrix(z2, ny * ny),
                          StochasticMatrix(zp2, z2)};
  for (int y1 = 0; y1 < ny; ++y1)
    for (int y2 = 0; y2 < ny; ++y2) {
      const int col = y1 * ny + y2;
      for (int u1 = 0; u1 < z1; ++u1)
        for (int u2 = 0; u2 < z1; ++u2)
          out.p_u_given_y(u1 * z1 + u2, col) =
              g.p_u_given_y(u1, y1) * g.p_u_given_y(u2, y2);
    }
  for (int u = 0; u < z2; ++u) {
    if (u < z1 * z1) {
      const int u1 = u / z1, u2 = u % z1;
      for (int t1 = 0; t1 < zp1; ++t1)
        for (int t2 = 0; t2 < zp1; ++t2)
          out.p_t_given_u(t1 * zp1 + t2, u) =
              g.p_t_given_u(t1, u1) * g.p_t_given_u(t2, u2);
    } else {
      out.p_t_given_u(0, u) = 1.0;  // unreachable symbol
    }
  }
  return out;
}

}  // namespace

RateResult multi_letter_rate(const CompoundSource& source, int k, int z,
                             int zprime, const OptimizerOptions& opts) {
  if (k != 1 && k != 2)
    throw ValidationError("multi_letter_rate: k must be 1 or 2");
  if (k == 1) return optimize_k1(source, z, zprime, opts);

  const int z1 = std::max(1, static_cast<int>(std::floor(std::sqrt(double(z)))));
  const int zp1 =
      std::max(1, static_cast<int>(std::floor(std::sqrt(double(zprime)))));
  const RateResult base = optimize_k1(source, z1, zp1, opts);

  OptimizerOptions ext_opts = opts;
  for (const auto& gr : base.per_group)
    ext_opts.warm_starts.push_back(
        product_gamma(gr.best, z, zprime, source.alphabet()));

  const CompoundSource ext = tensor_extension(source, 2);
  RateResult r = optimize_k1(ext, z, zprime, ext_opts);
  r.value *= 0.5;
  return r;
}

double converse_value(const CompoundSource& source, int k, double mu,
                      double log_m, int z, int zprime,
                      const OptimizerOptions& opts) {
  if (mu < 0.0 || mu > 1.0)
    throw ValidationError("converse_value: mu must be in [0,1]");
  const CompoundSource ext = k == 1 ? source : tensor_extension(source, k);
  const RateResult rate = optimize_k1(ext, z, zprime, opts);
  const double h = mu <= 0.0 || mu >= 1.0 ? 0.0 : binary_entropy(mu);
  return rate.value + 2.0 * mu + mu * log_m + h;
}

}  // namespace cqq
