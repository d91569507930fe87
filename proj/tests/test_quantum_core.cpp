#include <doctest.h>

#include <cmath>

#include "cqq/density.hpp"
#include "cqq/eig.hpp"
#include "cqq/entropy.hpp"
#include "cqq/errors.hpp"
#include "cqq/rng.hpp"

using namespace cqq;

namespace {

CMatrix random_hermitian(Rng& rng, std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = rng.next_double() - 0.5;
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) = cplx(rng.next_double() - 0.5, rng.next_double() - 0.5);
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

DensityMatrix random_state(Rng& rng, std::vector<int> dims) {
  std::size_t n = 1;
  for (int d : dims) n *= d;
  // G G^dagger normalized: Wishart-style PSD sample.
  CMatrix g(n, n);
  for (auto& v : g.a) v = cplx(rng.gaussian(), rng.gaussian());
  CMatrix rho = g * adjoint(g);
  const double tr = trace(rho).real();
  rho = (1.0 / tr) * rho;
  return DensityMatrix{std::move(rho), std::move(dims)};
}

DensityMatrix ket_plus() {
  CMatrix m(2, 2);
  m(0, 0) = m(0, 1) = m(1, 0) = m(1, 1) = 0.5;
  return DensityMatrix{std::move(m), {2}};
}

DensityMatrix bell_state() {
  CMatrix m(4, 4);
  m(0, 0) = m(0, 3) = m(3, 0) = m(3, 3) = 0.5;
  return DensityMatrix{std::move(m), {2, 2}};
}

// Classically correlated (1/2) sum_a |aa><aa|.
DensityMatrix classically_correlated() {
  CMatrix m(4, 4);
  m(0, 0) = m(3, 3) = 0.5;
  return DensityMatrix{std::move(m), {2, 2}};
}

}  // namespace

TEST_CASE("hermitian_eig basic spectra") {
  {
    const auto r = hermitian_eig(CMatrix::identity(2));
    CHECK(r.values[0] == doctest::Approx(1.0));
    CHECK(r.values[1] == doctest::Approx(1.0));
  }
  {
    CMatrix d(2, 2);
    d(0, 0) = 0.75;
    d(1, 1) = 0.25;
    const auto r = hermitian_eig(d);
    CHECK(r.values[0] == doctest::Approx(0.75));
    CHECK(r.values[1] == doctest::Approx(0.25));
  }
  {
    // (|0><0| + |+><+|)/2; characteristic polynomial x^2 - x + 1/8 gives
    // (2 +- sqrt 2)/4.
    CMatrix m(2, 2);
    m(0, 0) = 0.75;
    m(0, 1) = m(1, 0) = 0.25;
    m(1, 1) = 0.25;
    const auto r = hermitian_eig(m);
    const double hi = (2.0 + std::sqrt(2.0)) / 4.0;
    const double lo = (2.0 - std::sqrt(2.0)) / 4.0;
    CHECK(r.values[0] == doctest::Approx(hi).epsilon(1e-12));
    CHECK(r.values[1] == doctest::Approx(lo).epsilon(1e-12));
    // Oracle: both eigenvalues are roots of the characteristic polynomial.
    for (double lam : r.values)
      CHECK(std::abs(lam * lam - lam + 0.125) < 1e-12);
  }
}

TEST_CASE("hermitian_eig reconstructs and rejects bad input") {
  Rng rng(3, "eig-reconstruct");
  for (std::size_t n : {2u, 5u, 16u}) {
    const CMatrix m = random_hermitian(rng, n);
    const auto r = hermitian_eig(m);
    CMatrix lam(n, n);
    for (std::size_t i = 0; i < n; ++i) lam(i, i) = r.values[i];
    const CMatrix rec = r.vectors * lam * adjoint(r.vectors);
    CHECK(trace_norm_distance(m, rec) <= 1e-9 * double(n));
    // V unitary
    const CMatrix vvd = r.vectors * adjoint(r.vectors);
    CHECK(approx_equal(vvd, CMatrix::identity(n), 1e-10));
    // descending
    for (std::size_t i = 1; i < n; ++i) CHECK(r.values[i - 1] >= r.values[i]);
  }
  CMatrix bad(2, 2);
  bad(0, 1) = 1.0;  // not Hermitian
  CHECK_THROWS_AS(hermitian_eig(bad), ValidationError);
  CHECK_THROWS_AS(hermitian_eig(CMatrix(2, 3)), ValidationError);
}

TEST_CASE("von Neumann entropy") {
  CHECK(von_neumann_entropy(flat_state(2)) == doctest::Approx(1.0));
  CHECK(von_neumann_entropy(pure_basis_state(2, 0)) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CMatrix d(2, 2);
  d(0, 0) = 0.25;
  d(1, 1) = 0.75;
  const DensityMatrix rho{d, {2}};
  CHECK(von_neumann_entropy(rho) == doctest::Approx(binary_entropy(0.25)));
  CHECK(von_neumann_entropy(rho) == doctest::Approx(0.811278).epsilon(1e-6));
}

TEST_CASE("trace norm distance") {
  const auto z = pure_basis_state(2, 0);
  const auto o = pure_basis_state(2, 1);
  CHECK(trace_norm_distance(z, z) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(trace_norm_distance(z, o) == doctest::Approx(2.0));
  CHECK(trace_norm_distance(z, ket_plus()) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK_THROWS_AS(trace_norm_distance(z.m, CMatrix(3, 3)), ValidationError);

  Rng rng(5, "tracenorm-props");
  for (int t = 0; t < 50; ++t) {
    const auto a = random_state(rng, {4});
    const auto b = random_state(rng, {4});
    const auto c = random_state(rng, {4});
    const double ab = trace_norm_distance(a, b);
    CHECK(ab == doctest::Approx(trace_norm_distance(b, a)).epsilon(1e-10));
    CHECK(ab >= 0.0);
    CHECK(ab <= 2.0 + 1e-12);
    CHECK(ab <= trace_norm_distance(a, c) + trace_norm_distance(c, b) + 1e-10);
  }
}

TEST_CASE("partial trace") {
  Rng rng(9, "ptrace");
  const auto a = random_state(rng, {2});
  const auto b = random_state(rng, {3});
  const auto ab = tensor(a, b);
  CHECK(approx_equal(partial_trace(ab, {0}).m, a.m, 1e-12));
  CHECK(approx_equal(partial_trace(ab, {1}).m, b.m, 1e-12));
  CHECK(approx_equal(partial_trace(ab, {0, 1}).m, ab.m, 1e-12));
  CHECK(approx_equal(partial_trace(bell_state(), {0}).m, flat_state(2).m,
                     1e-12));
  CHECK_THROWS_AS(partial_trace(ab, {}), ValidationError);
  CHECK_THROWS_AS(partial_trace(ab, {2}), ValidationError);
}

TEST_CASE("tensor and tensor_power") {
  const auto pi2 = flat_state(2);
  const auto t = tensor(pi2, pi2);
  CHECK(t.dim() == 4);
  for (int i = 0; i < 4; ++i) CHECK(t.m(i, i).real() == doctest::Approx(0.25));
  const auto triple = tensor_power(pure_basis_state(2, 0), 3);
  CHECK(triple.dim() == 8);
  CHECK(triple.m(0, 0).real() == doctest::Approx(1.0));
  CHECK_THROWS_AS(tensor_power(pi2, 0), ValidationError);

  CMatrix d(2, 2);
  d(0, 0) = 0.25;
  d(1, 1) = 0.75;
  const DensityMatrix rho{d, {2}};
  CHECK(von_neumann_entropy(tensor_power(rho, 2)) ==
        doctest::Approx(2.0 * binary_entropy(0.25)).epsilon(1e-9));
  CHECK(von_neumann_entropy(tensor_power(rho, 2)) ==
        doctest::Approx(1.622556).epsilon(1e-6));

  Rng rng(13, "tensor-additivity");
  const auto x = random_state(rng, {2});
  const auto y = random_state(rng, {3});
  CHECK(von_neumann_entropy(tensor(x, y)) ==
        doctest::Approx(von_neumann_entropy(x) + von_neumann_entropy(y))
            .epsilon(1e-9));
}

TEST_CASE("conditional entropy") {
  Rng rng(17, "cond-entropy");
  const auto a = random_state(rng, {2});
  const auto b = random_state(rng, {2});
  const auto ab = tensor(a, b);
  CHECK(conditional_entropy(ab, {0}, {1}) ==
        doctest::Approx(von_neumann_entropy(a)).epsilon(1e-9));
  CHECK(conditional_entropy(bell_state(), {0}, {1}) ==
        doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(conditional_entropy(classically_correlated(), {0}, {1}) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK_THROWS_AS(conditional_entropy(ab, {0}, {0}), ValidationError);
}

TEST_CASE("mutual information") {
  Rng rng(19, "mi");
  const auto ab = tensor(random_state(rng, {2}), random_state(rng, {2}));
  CHECK(mutual_information(ab, {0}, {1}) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(mutual_information(classically_correlated(), {0}, {1}) ==
        doctest::Approx(1.0).epsilon(1e-9));

  // X uniform classical flag with rho_{AB,x} = |xx><xx|: conditionals are
  // product states, so I(A;B|X) = 0.
  CMatrix m(8, 8);
  m(0, 0) = 0.5;  // x=0, a=0, b=0
  m(7, 7) = 0.5;  // x=1, a=1, b=1
  const DensityMatrix rho{m, {2, 2, 2}};
  CHECK(mutual_information(rho, {1}, {2}, 0) ==
        doctest::Approx(0.0).epsilon(1e-9));
  // Unconditioned I(A;B) of the same state is 1.
  CHECK(mutual_information(rho, {1}, {2}) == doctest::Approx(1.0).epsilon(1e-9));

  // Conditioning register must be classical.
  DensityMatrix bell = bell_state();
  CHECK_THROWS_AS(mutual_information(
                      DensityMatrix{tensor(bell, flat_state(2)).m, {2, 2, 2}},
                      {1}, {2}, 0),
                  ValidationError);
}

TEST_CASE("classical entropies") {
  CHECK(shannon_entropy(uniform_distribution(4)) == doctest::Approx(2.0));
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
  CHECK(binary_entropy(0.0) == doctest::Approx(0.0));
  CHECK(binary_entropy(1.0) == doctest::Approx(0.0));
  const double h011 = -0.11 * std::log2(0.11) - 0.89 * std::log2(0.89);
  CHECK(binary_entropy(0.11) == doctest::Approx(h011).epsilon(1e-12));
  CHECK(binary_entropy(0.11) == doctest::Approx(0.499916).epsilon(1e-5));
  CHECK_THROWS_AS(binary_entropy(1.5), ValidationError);
}

TEST_CASE("entropy invariants on random states") {
  Rng rng(23, "entropy-props");
  // Unitary invariance, 500 random states with unitaries from random
  // Hermitian eigenbases.
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 2 + t % 3;
    const auto rho = random_state(rng, {int(n)});
    const CMatrix u = hermitian_eig(random_hermitian(rng, n)).vectors;
    const CMatrix rotated = u * rho.m * adjoint(u);
    CHECK(std::abs(von_neumann_entropy(rotated) - von_neumann_entropy(rho)) <
          1e-9);
  }
  // Subadditivity on random bipartite states.
  for (int t = 0; t < 60; ++t) {
    const auto rho = random_state(rng, {2, 3});
    const double s_ab = von_neumann_entropy(rho);
    const double s_a = von_neumann_entropy(partial_trace(rho, {0}));
    const double s_b = von_neumann_entropy(partial_trace(rho, {1}));
    CHECK(s_ab <= s_a + s_b + 1e-9);
  }
  // tr_B(rho_A (x) rho_B) = rho_A exactly at tolerance.
  for (int t = 0; t < 20; ++t) {
    const auto a = random_state(rng, {3});
    const auto b = random_state(rng, {2});
    CHECK(approx_equal(partial_trace(tensor(a, b), {0}).m, a.m, 1e-10));
  }
  // Nonnegativity of mutual information; conditional entropy range.
  for (int t = 0; t < 100; ++t) {
    const auto rho = random_state(rng, {2, 2});
    CHECK(mutual_information(rho, {0}, {1}) >= -1e-9);
    const double cond = conditional_entropy(rho, {0}, {1});
    CHECK(cond >= -1.0 - 1e-9);
    CHECK(cond <= 1.0 + 1e-9);
  }
}

TEST_CASE("density matrix validation") {
  CMatrix notrace(2, 2);
  notrace(0, 0) = 0.7;
  notrace(1, 1) = 0.7;
  CHECK(density_violation(notrace, {2}).has_value());
  CHECK_THROWS_AS(DensityMatrix::make(notrace, {2}), ValidationError);

  CMatrix neg(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK(density_violation(neg, {2}).has_value());

  CHECK(density_violation(flat_state(4).m, {2, 3}).has_value());
  CHECK_FALSE(density_violation(flat_state(4).m, {2, 2}).has_value());

  CHECK(distribution_violation({0.5, 0.6}).has_value());
  CHECK(distribution_violation({-0.1, 1.1}).has_value());
  CHECK_FALSE(distribution_violation({0.25, 0.75}).has_value());
}

TEST_CASE("povm validation") {
  const CMatrix p0 = basis_projector(2, 0);
  const CMatrix p1 = basis_projector(2, 1);
  CHECK_FALSE(povm_violation({p0, p1}, true).has_value());
  CHECK(povm_violation({p0, p0}, true).has_value());
  CHECK_FALSE(povm_violation({p0}, false).has_value());
  CHECK(povm_violation({2.0 * p0}, false).has_value());
}
