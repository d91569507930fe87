#include <doctest.h>

#include <cmath>

#include "cqq/counterexample.hpp"
#include "cqq/entropy.hpp"
#include "cqq/errors.hpp"
#include "cqq/rates.hpp"
#include "cqq/rng.hpp"

using namespace cqq;

namespace {

DensityMatrix bipartite(const DensityMatrix& b, const DensityMatrix& e) {
  DensityMatrix r = tensor(b, e);
  r.subsystem_dims = {int(b.dim()), int(e.dim())};
  return r;
}

DensityMatrix trivial_register() {
  CMatrix one(1, 1);
  one(0, 0) = 1.0;
  return DensityMatrix{std::move(one), {1}};
}

// B receives x perfectly, E holds nothing.
CqqState perfect_correlation_source(const std::vector<double>& p) {
  std::vector<DensityMatrix> outs;
  for (std::size_t x = 0; x < p.size(); ++x)
    outs.push_back(bipartite(pure_basis_state(int(p.size()), int(x)),
                             trivial_register()));
  return CqqState::make(ClassicalDistribution::make(p),
                        CqChannel::make(std::move(outs)));
}

// E receives x perfectly, B holds nothing.
CqqState eavesdropped_source(const std::vector<double>& p) {
  std::vector<DensityMatrix> outs;
  for (std::size_t x = 0; x < p.size(); ++x)
    outs.push_back(bipartite(trivial_register(),
                             pure_basis_state(int(p.size()), int(x))));
  return CqqState::make(ClassicalDistribution::make(p),
                        CqChannel::make(std::move(outs)));
}

CqqState random_binary_qubit_source(Rng& rng) {
  std::vector<DensityMatrix> outs;
  for (int x = 0; x < 2; ++x) {
    CMatrix g(4, 4);
    for (auto& v : g.a) v = cplx(rng.gaussian(), rng.gaussian());
    CMatrix rho = g * adjoint(g);
    rho = (1.0 / trace(rho).real()) * rho;
    outs.push_back(DensityMatrix{std::move(rho), {2, 2}});
  }
  std::vector<double> p = rng.dirichlet(2);
  // Keep marginals away from degenerate corners.
  p[0] = 0.15 + 0.7 * p[0];
  p[1] = 1.0 - p[0];
  return CqqState::make(ClassicalDistribution::make(p),
                        CqChannel::make(std::move(outs)));
}

// Identity U map with a trivial (constant) T: the chain that simply reveals
// Y to the key derivation without conditioning anything away.
MarkovPreprocessing passthrough_gamma(int z, int zp, int ny) {
  return {StochasticMatrix::identity_like(z, ny),
          StochasticMatrix::constant(zp, z)};
}

}  // namespace

TEST_CASE("stochastic matrix validation") {
  auto m = StochasticMatrix::identity_like(2, 3);
  CHECK_NOTHROW(m.validate());
  m(0, 0) = 0.4;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m(0, 0) = 1.2;
  m(1, 0) = -0.2;
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("apply_preprocessing structure") {
  const auto st = perfect_correlation_source({0.5, 0.5});

  SUBCASE("identity U, constant T embeds the coherified state") {
    MarkovPreprocessing g{StochasticMatrix::identity_like(2, 2),
                          StochasticMatrix::constant(1, 2)};
    const auto rho = apply_preprocessing(st, g);
    CHECK(rho.subsystem_dims == std::vector<int>{1, 2, 2, 1});
    const auto coh = coherify(st);
    // Drop the trivial T register and compare.
    const auto reduced = partial_trace(rho, {1, 2, 3});
    CHECK(approx_equal(reduced.m, coh.m, 1e-12));
  }

  SUBCASE("constant U column makes U useless") {
    MarkovPreprocessing g{StochasticMatrix::constant(2, 2),
                          StochasticMatrix::identity_like(2, 2)};
    const auto infos = preprocessed_infos(st, g);
    CHECK(infos.i_ub_given_t == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(infos.i_ue_given_t == doctest::Approx(0.0).epsilon(1e-10));
  }

  SUBCASE("counterexample balanced member with u = x") {
    const auto cx = build_counterexample(default_counterexample_grid(3));
    const auto& pi_member = cx.source.states[cx.pi_index];
    // u = x-part of the pair letter a = 2x + y, trivial conditioning.
    MarkovPreprocessing g{StochasticMatrix::deterministic({0, 0, 1, 1}, 2),
                          StochasticMatrix::constant(2, 2)};
    const auto infos = preprocessed_infos(pi_member, g);
    CHECK(infos.i_ub_given_t == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(infos.i_ue_given_t == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("fast path matches the generic mutual information") {
  Rng rng(51, "rates-dual-route");
  for (int t = 0; t < 12; ++t) {
    const auto st = random_binary_qubit_source(rng);
    MarkovPreprocessing g{StochasticMatrix(2, 2), StochasticMatrix(2, 2)};
    for (int c = 0; c < 2; ++c) {
      const auto cu = rng.dirichlet(2);
      const auto ct = rng.dirichlet(2);
      for (int r = 0; r < 2; ++r) {
        g.p_u_given_y(r, c) = cu[r];
        g.p_t_given_u(r, c) = ct[r];
      }
    }
    const auto fast = preprocessed_infos(st, g);
    const auto rho = apply_preprocessing(st, g);
    //

    CHECK(fast.i_ub_given_t ==
          doctest::Approx(mutual_information(rho, {1}, {2}, 0)).epsilon(1e-9));
    CHECK(fast.i_ue_given_t ==
          doctest::Approx(mutual_information(rho, {1}, {3}, 0)).epsilon(1e-9));
  }
}

TEST_CASE("group objective") {
  SUBCASE("perfect correlation, identity gamma") {
    const auto src =
        CompoundSource::make({perfect_correlation_source({0.5, 0.5})});
    const auto groups = group_by_sender_marginal(src);
    CHECK(group_objective(src, groups[0], passthrough_gamma(2, 2, 2)) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("B = E channels give zero for every gamma") {
    std::vector<DensityMatrix> outs;
    for (int x = 0; x < 2; ++x)
      outs.push_back(bipartite(pure_basis_state(2, x), pure_basis_state(2, x)));
    const auto src = CompoundSource::make(
        {CqqState::make(uniform_distribution(2), CqChannel::make(outs))});
    const auto groups = group_by_sender_marginal(src);
    Rng rng(57, "rates-symmetric");
    for (int t = 0; t < 8; ++t) {
      MarkovPreprocessing g{StochasticMatrix(2, 2), StochasticMatrix(2, 2)};
      for (int c = 0; c < 2; ++c) {
        const auto cu = rng.dirichlet(2);
        const auto ct = rng.dirichlet(2);
        for (int r = 0; r < 2; ++r) {
          g.p_u_given_y(r, c) = cu[r];
          g.p_t_given_u(r, c) = ct[r];
        }
      }
      CHECK(group_objective(src, groups[0], g) ==
            doctest::Approx(0.0).epsilon(1e-9));
    }
  }

  SUBCASE("degraded member attains the minimum") {
    // Member 1's B output is a depolarized copy of member 0's.
    std::vector<DensityMatrix> sharp, fuzzy;
    for (int x = 0; x < 2; ++x) {
      sharp.push_back(bipartite(pure_basis_state(2, x), trivial_register()));
      CMatrix m = 0.6 * pure_basis_state(2, x).m;
      accumulate(m, 0.4, flat_state(2).m);
      fuzzy.push_back(bipartite(DensityMatrix{std::move(m), {2}},
                                trivial_register()));
    }
    const auto p = uniform_distribution(2);
    const auto src = CompoundSource::make(
        {CqqState::make(p, CqChannel::make(sharp)),
         CqqState::make(p, CqChannel::make(fuzzy))});
    const auto groups = group_by_sender_marginal(src);
    REQUIRE(groups.size() == 1);
    const auto g = passthrough_gamma(2, 2, 2);
    const double objective = group_objective(src, groups[0], g);
    const double sharp_info =
        preprocessed_infos(src.states[0], g).i_ub_given_t;
    const double fuzzy_info =
        preprocessed_infos(src.states[1], g).i_ub_given_t;
    CHECK(fuzzy_info < sharp_info);
    CHECK(objective == doctest::Approx(fuzzy_info).epsilon(1e-9));
  }
}

TEST_CASE("group objective label-permutation invariance") {
  Rng rng(61, "rates-relabel");
  const auto src = CompoundSource::make({random_binary_qubit_source(rng)});
  const auto groups = group_by_sender_marginal(src);
  MarkovPreprocessing g{StochasticMatrix(3, 2), StochasticMatrix(2, 3)};
  for (int c = 0; c < 2; ++c) {
    const auto col = rng.dirichlet(3);
    for (int r = 0; r < 3; ++r) g.p_u_given_y(r, c) = col[r];
  }
  for (int c = 0; c < 3; ++c) {
    const auto col = rng.dirichlet(2);
    for (int r = 0; r < 2; ++r) g.p_t_given_u(r, c) = col[r];
  }
  const double base = group_objective(src, groups[0], g);

  // Swap U labels 0 and 2 consistently in both matrices.
  MarkovPreprocessing perm = g;
  for (int c = 0; c < 2; ++c) {
    std::swap(perm.p_u_given_y.a[0 * 2 + c], perm.p_u_given_y.a[2 * 2 + c]);
  }
  for (int r = 0; r < 2; ++r)
    std::swap(perm.p_t_given_u.a[r * 3 + 0], perm.p_t_given_u.a[r * 3 + 2]);
  CHECK(group_objective(src, groups[0], perm) ==
        doctest::Approx(base).epsilon(1e-10));

  // Swap T labels.
  MarkovPreprocessing tperm = g;
  for (int c = 0; c < 3; ++c)
    std::swap(tperm.p_t_given_u.a[0 * 3 + c], tperm.p_t_given_u.a[1 * 3 + c]);
  CHECK(group_objective(src, groups[0], tperm) ==
        doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("objective never exceeds H(p)") {
  Rng rng(67, "rates-hp-bound");
  for (int t = 0; t < 10; ++t) {
    const auto st = random_binary_qubit_source(rng);
    const auto src = CompoundSource::make({st});
    const auto groups = group_by_sender_marginal(src);
    MarkovPreprocessing g{StochasticMatrix(2, 2), StochasticMatrix(2, 2)};
    for (int c = 0; c < 2; ++c) {
      const auto cu = rng.dirichlet(2);
      const auto ct = rng.dirichlet(2);
      for (int r = 0; r < 2; ++r) {
        g.p_u_given_y(r, c) = cu[r];
        g.p_t_given_u(r, c) = ct[r];
      }
    }
    const double hp = shannon_entropy(st.p);
    CHECK(preprocessed_infos(st, g).i_ub_given_t <= hp + 1e-9);
    CHECK(group_objective(src, groups[0], g) <= hp + 1e-9);
  }
}

TEST_CASE("optimize_k1 on reference sources") {
  OptimizerOptions opts;
  opts.restarts = 8;
  opts.seed = 3;

  SUBCASE("perfect correlation reaches one bit") {
    const auto src =
        CompoundSource::make({perfect_correlation_source({0.5, 0.5})});
    const auto r = optimize_k1(src, 2, 2, opts);
    CHECK(r.value >= 1.0 - 1e-6);
    CHECK(r.value <= 1.0 + 1e-9);
    CHECK(r.converged);
    CHECK(r.per_group.size() == 1);
    CHECK(r.value == doctest::Approx(r.per_group[0].value));
  }

  SUBCASE("eavesdropped source pins to zero") {
    const auto src = CompoundSource::make({eavesdropped_source({0.5, 0.5})});
    const auto r = optimize_k1(src, 2, 2, opts);
    CHECK(r.value == 0.0);
  }

  SUBCASE("deterministic for a fixed seed and monotone in restarts") {
    Rng rng(71, "rates-mono");
    const auto src = CompoundSource::make({random_binary_qubit_source(rng)});
    OptimizerOptions a = opts;
    a.restarts = 3;
    const auto r1 = optimize_k1(src, 2, 2, a);
    const auto r1_again = optimize_k1(src, 2, 2, a);
    CHECK(r1.value == r1_again.value);  // bit-for-bit
    OptimizerOptions b = opts;
    b.restarts = 9;
    const auto r2 = optimize_k1(src, 2, 2, b);
    CHECK(r2.value >= r1.value);
  }

  SUBCASE("warm-started larger alphabets dominate") {
    Rng rng(73, "rates-embed");
    const auto src = CompoundSource::make({random_binary_qubit_source(rng)});
    OptimizerOptions small = opts;
    small.restarts = 4;
    const auto r_small = optimize_k1(src, 2, 2, small);

    OptimizerOptions big = small;
    for (const auto& g : r_small.per_group) {
      // Embed the smaller chain: extra U symbols get zero mass.
      MarkovPreprocessing w{StochasticMatrix(3, 2), StochasticMatrix(3, 3)};
      for (int c = 0; c < 2; ++c)
        for (int r = 0; r < 2; ++r) w.p_u_given_y(r, c) = g.best.p_u_given_y(r, c);
      for (int c = 0; c < 2; ++c)
        for (int r = 0; r < 2; ++r) w.p_t_given_u(r, c) = g.best.p_t_given_u(r, c);
      w.p_t_given_u(0, 2) = 1.0;  // unreachable column
      big.warm_starts.push_back(w);
    }
    const auto r_big = optimize_k1(src, 3, 3, big);
    CHECK(r_big.value >= r_small.value - 1e-9);
  }

  SUBCASE("thread count does not change the result") {
    Rng rng(83, "rates-threads");
    const auto src = CompoundSource::make({random_binary_qubit_source(rng)});
    OptimizerOptions serial = opts;
    serial.restarts = 6;
    serial.threads = 1;
    OptimizerOptions parallel = serial;
    parallel.threads = 2;
    CHECK(optimize_k1(src, 2, 2, serial).value ==
          optimize_k1(src, 2, 2, parallel).value);
  }

  SUBCASE("budget exhaustion returns best-so-far unconverged") {
    const auto src =
        CompoundSource::make({perfect_correlation_source({0.5, 0.5})});
    OptimizerOptions tight = opts;
    tight.eval_budget = 8;
    const auto r = optimize_k1(src, 2, 2, tight);
    CHECK_FALSE(r.converged);
  }

  CHECK_THROWS_AS(optimize_k1(CompoundSource::make(
                                  {perfect_correlation_source({0.5, 0.5})}),
                              0, 2, opts),
                  ValidationError);
}

TEST_CASE("multi letter rate") {
  OptimizerOptions opts;
  opts.restarts = 4;
  opts.seed = 5;

  const auto src =
      CompoundSource::make({perfect_correlation_source({0.5, 0.5})});
  const auto r1 = multi_letter_rate(src, 1, 2, 2, opts);
  const auto base = optimize_k1(src, 2, 2, opts);
  CHECK(r1.value == base.value);

  const auto r2 = multi_letter_rate(src, 2, 4, 4, opts);
  CHECK(r2.value == doctest::Approx(1.0).epsilon(1e-3));

  // Superadditivity through the product warm start.
  Rng rng(79, "rates-fekete");
  const auto rnd = CompoundSource::make({random_binary_qubit_source(rng)});
  const auto b1 = optimize_k1(rnd, 2, 2, opts);
  const auto b2 = multi_letter_rate(rnd, 2, 4, 4, opts);
  CHECK(b2.value >= b1.value - 0.02);

  CHECK_THROWS_AS(multi_letter_rate(src, 3, 2, 2, opts), ValidationError);
}

TEST_CASE("converse value") {
  OptimizerOptions opts;
  opts.restarts = 4;
  opts.seed = 9;
  const auto src =
      CompoundSource::make({perfect_correlation_source({0.5, 0.5})});

  // mu = 0 leaves the bare rate estimate.
  const double bare = converse_value(src, 1, 0.0, 1.0, 2, 2, opts);
  const auto rate = optimize_k1(src, 2, 2, opts);
  CHECK(bare == doctest::Approx(rate.value).epsilon(1e-12));

  // M = 1 protocols always satisfy the bound.
  CHECK(converse_value(src, 1, 0.3, 0.0, 2, 2, opts) >= 0.0);

  // Copy protocol tightness: log M = 1 = bound at mu = 0.
  CHECK(converse_value(src, 1, 0.0, 1.0, 2, 2, opts) ==
        doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(converse_value(src, 1, 1.5, 1.0, 2, 2, opts),
                  ValidationError);
}
