#include <doctest.h>

#include <cmath>

#include "cqq/counterexample.hpp"
#include "cqq/entropy.hpp"
#include "cqq/errors.hpp"

using namespace cqq;

namespace {

std::vector<ClassicalDistribution> acceptance_grid() {
  return {uniform_distribution(2), ClassicalDistribution::make({0.3, 0.7}),
          ClassicalDistribution::make({0.9, 0.1}),
          ClassicalDistribution::make({0.6, 0.4})};
}

// The swapped-register twin: both receivers see the eavesdropper-side
// channel letter, so its B side mirrors the original's E side exactly.
CqqState swapped_twin(const ClassicalDistribution& p) {
  std::vector<double> weights(4);
  std::vector<DensityMatrix> outs(4);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const int a = 2 * x + y;
      weights[a] = 0.5 * p.probs[x];
      DensityMatrix w1x = tensor(pure_basis_state(2, x), flat_state(2));
      w1x.subsystem_dims = {4};
      DensityMatrix be = tensor(w1x, w1x);
      be.subsystem_dims = {4, 4};
      outs[a] = std::move(be);
    }
  return CqqState::make(ClassicalDistribution::make(weights),
                        CqChannel::make(std::move(outs)));
}

}  // namespace

TEST_CASE("counterexample source structure") {
  const auto cx = build_counterexample(acceptance_grid());
  REQUIRE(cx.source.size() == 4);
  CHECK(cx.pi_index == 0);
  CHECK(cx.source.alphabet() == 4);
  CHECK(cx.source.dim_b() == 4);
  CHECK(cx.source.dim_e() == 4);

  // Sender marginal of the balanced member is uniform over the 4 pairs.
  for (double w : cx.source.states[0].p.probs)
    CHECK(w == doctest::Approx(0.25));
  // Every member has unit trace after coherification.
  for (const auto& member : cx.source.states)
    CHECK(trace(coherify(member).m).real() == doctest::Approx(1.0));

  // B marginal of the balanced member is the flat two-qubit state.
  const auto rho_pi = coherify(cx.source.states[0]);
  const auto b_marg = partial_trace(rho_pi, {1});
  CHECK(approx_equal(b_marg.m, flat_state(4).m, 1e-12));

  // AB marginal of the balanced member: sum over pairs of
  // (1/4)|xy><xy| (x) |x><x| (x) flat.
  const auto ab = partial_trace(rho_pi, {0, 1});
  CMatrix expected(16, 16);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const int a = 2 * x + y;
      for (int q2 = 0; q2 < 2; ++q2) {
        const int b = 2 * x + q2;
        expected(a * 4 + b, a * 4 + b) = 0.25 * 0.5;
      }
    }
  CHECK(approx_equal(ab.m, expected, 1e-12));

  // Distinct grid points land in distinct marginal groups.
  CHECK(group_by_sender_marginal(cx.source, 0.0).size() == 4);
  const auto six = build_counterexample(default_counterexample_grid(6));
  CHECK(group_by_sender_marginal(six.source, 0.0).size() == 6);

  CHECK_THROWS_AS(
      build_counterexample({ClassicalDistribution::make({0.3, 0.7})}),
      ValidationError);
  CHECK_THROWS_AS(
      build_counterexample({ClassicalDistribution::make({0.3, 0.7}),
                            ClassicalDistribution::make({0.7, 0.3})}),
      ValidationError);
}

TEST_CASE("smi protocol achieves one perfect key bit per symbol") {
  const auto cx = build_counterexample(acceptance_grid());
  for (int n = 1; n <= 2; ++n) {
    const auto res = smi_capacity_protocol(cx, n);
    CHECK(res.report.log_m == doctest::Approx(double(n)));
    for (const auto& member : res.report.members) {
      CHECK(member.error_prob <= 1e-12);
      CHECK(member.security_index <= 1e-9);
    }
    // The key is exactly uniform.
    for (double w : res.report.members[0].key_marginal)
      CHECK(w == doctest::Approx(std::pow(0.5, n)));
  }
}

TEST_CASE("blind balanced branch collapses away from the balanced point") {
  const auto cx = build_counterexample(acceptance_grid());

  SUBCASE("matched at the balanced point") {
    const auto blind = pi_branch_protocol(cx, 1);
    const auto rep = evaluate_protocol(blind, cx.source.states[cx.pi_index]);
    CHECK(rep.error_prob <= 1e-12);
    CHECK(rep.security_index <= 1e-9);
  }

  SUBCASE("one full bit of leakage at p = (0.3, 0.7), n = 1") {
    const auto blind = pi_branch_protocol(cx, 1);
    const auto rep = evaluate_protocol(blind, cx.source.states[1]);
    CHECK(rep.security_index == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("gap report") {
    const auto blind = pi_branch_protocol(cx, 2);
    const auto rep = no_smi_gap_demo(cx, blind, 2);
    REQUIRE(rep.rows.size() == 4);
    CHECK(rep.rows[0].security_index <= 1e-9);  // balanced row
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      CHECK(rep.rows[i].security_index >= 0.9);
      CHECK(rep.rows[i].chain_bound > 0.0);
    }
    CHECK(rep.worst_case >= 0.9);
  }

  SUBCASE("trivial blind protocol reports a zero gap") {
    Protocol trivial;
    trivial.n = 1;
    trivial.alphabet = 4;
    trivial.l_count = 1;
    trivial.m_count = 1;
    trivial.t_rows.resize(4);
    for (auto& row : trivial.t_rows) row.push_back({0, 0, 1.0});
    DecoderSet dec;
    dec.diagonal = true;
    dec.diag.push_back(std::vector<double>(4, 1.0));
    trivial.decoders.push_back(std::move(dec));
    trivial.validate();
    const auto rep = no_smi_gap_demo(cx, trivial, 1);
    CHECK(rep.worst_case <= 1e-12);
  }
}

TEST_CASE("mutual-information identity and distance bound") {
  const auto cx = build_counterexample(acceptance_grid());
  for (int n = 1; n <= 2; ++n) {
    const auto blind = pi_branch_protocol(cx, n);
    for (std::size_t i = 1; i < cx.p_grid.size(); ++i) {
      const auto& member = cx.source.states[i];
      const auto twin = swapped_twin(cx.p_grid[i]);

      // I(K; Lambda E^n, rho_p) = I(K; Lambda B^n, twin).
      const double lhs =
          key_register_joint(blind, member, 1).mutual_information();
      const double rhs =
          key_register_joint(blind, twin, 0).mutual_information();
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));

      // || rho_{K Lambda B^n, pi} - twin_{K Lambda B^n, p} ||_1
      //   <= n || p - pi ||_1.
      const auto joint_pi =
          key_register_joint(blind, cx.source.states[cx.pi_index], 0);
      const auto joint_tw = key_register_joint(blind, twin, 0);
      double dist = 0.0;
      for (std::size_t b = 0; b < joint_pi.blocks.size(); ++b)
        dist += trace_norm(joint_pi.blocks[b] - joint_tw.blocks[b]);
      const double bound =
          double(n) * l1_distance(cx.p_grid[i], cx.p_grid[cx.pi_index]);
      CHECK(dist <= bound + 1e-9);
    }
  }
}

TEST_CASE("smi evaluation demands a matching family entry") {
  const auto cx = build_counterexample(acceptance_grid());
  auto res = smi_capacity_protocol(cx, 1);
  res.protocol.family.resize(1);  // drop every branch but the balanced one
  CHECK_THROWS_AS(evaluate_on_source(res.protocol, cx.source),
                  ValidationError);
}

TEST_CASE("default grid construction") {
  const auto grid = default_counterexample_grid(5);
  REQUIRE(grid.size() == 5);
  CHECK(grid[0].probs[0] == doctest::Approx(0.5));
  for (std::size_t i = 1; i < grid.size(); ++i)
    CHECK(std::abs(grid[i].probs[0] - 0.5) > 1e-9);
  CHECK_THROWS_AS(default_counterexample_grid(1), ValidationError);
}
