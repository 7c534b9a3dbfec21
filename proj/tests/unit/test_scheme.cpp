#include "doctest.h"

#include <cmath>
#include <random>

#include "freeclt/errors.hpp"
#include "freeclt/freeconv.hpp"
#include "freeclt/scheme.hpp"

using namespace freeclt;

namespace {

using Series = std::vector<OperatorPoly>;  // coefficient of eps^k at index k

Series mul(const Series& a, const Series& b) {
  Series out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < a.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

long long factorial(int k) { return k <= 1 ? 1 : k * factorial(k - 1); }

FreeCumulants kap(std::vector<double> k) {
  FreeCumulants f;
  f.kappa = std::move(k);
  f.support_radius = 3.0;
  return f;
}

}  // namespace

TEST_CASE("cumulant operators") {
  CHECK(cumulant_operator(2) == OperatorPoly::monomial({2}));
  CHECK(cumulant_operator(3) == OperatorPoly::monomial({3}));
  CHECK(cumulant_operator(4) == OperatorPoly::monomial({4}) + OperatorPoly::monomial({2, 2}, Rational(-3)));
  CHECK(cumulant_operator(5) == OperatorPoly::monomial({5}) + OperatorPoly::monomial({3, 2}, Rational(-10)));
  CHECK(cumulant_operator(4).to_string() == "D^4 - 3 D^2 D^2");
  CHECK(cumulant_operator(6).coefficient({2, 2, 2}) == Rational(30));
  CHECK(cumulant_operator(6).coefficient({3, 3}) == Rational(-10));
  CHECK_THROWS_AS(cumulant_operator(1), Error);
}

TEST_CASE("exponential of the cumulant series recovers the moment series") {
  constexpr int N = 7;
  Series x(N + 1);
  for (int p = 2; p <= N; ++p) x[p] = cumulant_operator(p) * Rational(1, factorial(p));
  Series e(N + 1), power(N + 1);
  e[0] = OperatorPoly::constant(Rational(1));
  power[0] = OperatorPoly::constant(Rational(1));
  for (int k = 1; k <= N; ++k) {
    power = mul(power, x);
    for (int i = 0; i <= N; ++i) e[i] += power[i] * Rational(1, factorial(k));
  }
  CHECK(e[0] == OperatorPoly::constant(Rational(1)));
  CHECK(e[1] == OperatorPoly());
  for (int q = 2; q <= N; ++q) CHECK(e[q] == OperatorPoly::monomial({q}, Rational(1, factorial(q))));
}

TEST_CASE("Edgeworth polynomials") {
  CHECK(edgeworth_polynomial(0) == CumulantPoly{{{}, Rational(1)}});
  CHECK(edgeworth_polynomial(1) == CumulantPoly{{{3}, Rational(1, 6)}});
  CHECK(edgeworth_polynomial(2) == CumulantPoly{{{4}, Rational(1, 24)}, {{3, 3}, Rational(1, 72)}});
  const auto p3 = edgeworth_polynomial(3);
  CHECK(p3.at({5}) == Rational(1, 120));
  CHECK(p3.at({4, 3}) == Rational(1, 144));
  CHECK(p3.at({3, 3, 3}) == Rational(1, 1296));
  CHECK(edgeworth_operator(1).to_string() == "1/6 D^3");
  CHECK(edgeworth_operator(2).coefficient({2, 2}) == Rational(-1, 8));
  CHECK_THROWS_AS(edgeworth_polynomial(4), Error);
}

TEST_CASE("derivatives of h at the origin") {
  const auto win = make_window(0.05);
  const auto fp = Measure::free_poisson(1.0, -1.0);
  const auto k = free_cumulants(fp, 9);
  for (cplx z : {cplx(0.3, 0.01), cplx(-1.2, -0.004), cplx(1.5, 0.0)}) {
    CHECK(std::abs(h_inf_derivative({1}, k, z, win)) < 1e-14);
    const cplx g = semicircle_cauchy(z);
    const cplx closed = 6.0 * k(3) * std::pow(g, 4) / (1.0 - g * g);
    CHECK(std::abs(h_inf_derivative({3}, k, z, win) - closed) < 1e-12 * std::abs(closed));
    // second order sees only the variance: omega of variance 1 + eps^2
    CHECK(std::abs(h_inf_derivative({2}, k, z, win) - 2.0 * (1.0 / (z - 2.0 * g) - g)) < 1e-12);
  }

  const cplx z(0.5, 0.05);
  const cplx g = semicircle_cauchy(z);
  const cplx closed = 6.0 * std::pow(g, 4) / (1.0 - g * g);
  CHECK(std::abs(h_inf_derivative_fd({3}, fp, z) - closed) <= 1e-4 * std::abs(closed));
  for (const Monomial& a : {Monomial{4}, Monomial{3, 3}, Monomial{2, 2}, Monomial{4, 2}})
    CHECK(h_inf_derivative_checked(a, fp, z, win) == h_inf_derivative(a, k, z, win));

  CHECK_THROWS_AS(h_inf_derivative({3}, k, cplx(1.99, 0.0), win), Error);
}

TEST_CASE("assembled expansion matches the closed-form expansion") {
  const auto win = make_window(0.05);
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> ux(win.K.x_lo, win.K.x_hi), uy(-win.K.y_max * 0.99, win.K.y_max * 0.99),
      uk(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto k = kap({0, 1, uk(rng), uk(rng), uk(rng)});
    const cplx z(ux(rng), uy(rng));
    const auto a = assemble_expansion(k, 50, z, 2, win);
    const auto e = expand_cauchy(z, k, 50, 2, win);
    for (std::size_t r = 0; r <= 2; ++r) CHECK(std::abs(a.orders[r] - e.orders[r]) <= 1e-6);
  }

  const auto fp = Measure::free_poisson(1.0, -1.0);
  const cplx z(0.3, 0.01);
  const auto a = assemble_expansion(fp, 100, z, 3, win);
  const auto e = expand_cauchy(z, free_cumulants(fp, 5), 100, 3, win);
  CHECK(std::abs(a.orders[3] - e.orders[3]) <= 1e-6);

  const auto sc = assemble_expansion(Measure::semicircle(), 30, z, 3, win);
  CHECK(std::abs(sc.total - semicircle_cauchy(z)) < 1e-12);
  const auto k3 = kap({0, 1, 0.8, 0, 0});
  const auto o1 = assemble_expansion(k3, 30, z, 1, win);
  CHECK(std::abs(o1.orders[1] - coefficient_B(1, semicircle_cauchy(z), k3)) < 1e-12);
}

TEST_CASE("h is symmetric and compatible") {
  const auto sc = Measure::semicircle();
  const auto b = Measure::bernoulli();
  const auto fp = Measure::free_poisson(1.0, -1.0);
  for (const auto& mu : {b, fp})
    for (cplx z : {cplx(0.4, 0.006), cplx(-1.0, 0.3)}) {
      const cplx base = partial_convolution(mu, {0.1, -0.2, 0.05}, sc, z);
      CHECK(std::abs(partial_convolution(mu, {-0.2, 0.05, 0.1}, sc, z) - base) <= 1e-10);
      CHECK(std::abs(partial_convolution(mu, {0.05, 0.1, -0.2}, sc, z) - base) <= 1e-10);
      CHECK(std::abs(partial_convolution(mu, {0.1, 0.0, -0.2, 0.05, 0.0}, sc, z) - base) <= 1e-10);
    }
}

TEST_CASE("convergence probe") {
  const cplx z(0.3, 0.01);
  const std::vector<int> ns{16, 32, 64, 128, 256};
  const auto sc = convergence_probe(Measure::semicircle(), 1, ns, z);
  for (double d : sc.difference) CHECK(d < 1e-13);

  const auto fp = convergence_probe(Measure::free_poisson(1.0, -1.0), 0, ns, z);
  CHECK(fp.slope == doctest::Approx(-0.5).epsilon(0.3));
  const auto fp1 = convergence_probe(Measure::free_poisson(1.0, -1.0), 1, ns, z);
  for (std::size_t i = 0; i < ns.size(); ++i) CHECK(fp1.difference[i] <= fp1.constant / std::sqrt(ns[i]) * (1 + 1e-12));

  // symmetric Bernoulli has kappa3 = 0, so the leading term is of order 1/n
  const auto b = convergence_probe(Measure::bernoulli(), 0, ns, z);
  CHECK(b.slope == doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("empirical derivative sup") {
  const auto win = make_window(0.05);
  const auto fp = Measure::free_poisson(1.0, -1.0);
  std::vector<double> sups;
  for (int m : {64, 256, 1024}) {
    const auto d = empirical_derivative_sup(fp, {3}, 16, m, win);
    CHECK(std::isfinite(d.d_s_r));
    CHECK(d.fd_step >= 1e-4);
    CHECK(d.fd_step <= 1e-1);
    sups.push_back(d.d_s_r);
  }
  CHECK(sups.front() / sups.back() < 2.0);
  CHECK(sups.front() / sups.back() > 0.5);
  CHECK(std::isfinite(empirical_derivative_sup(fp, {2, 2}, 16, 64, win).d_s_r));
}
