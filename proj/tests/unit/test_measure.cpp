#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "freeclt/measure.hpp"
#include "freeclt/measure_json.hpp"

using namespace freeclt;

namespace {

// composite Simpson on [a, b]
template <class F>
double simpson(F f, double a, double b, int m = 20000) {
  const double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int i = 1; i < m; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double sc_pdf(double x) { return x * x < 4 ? std::sqrt(4 - x * x) / (2 * std::numbers::pi) : 0.0; }

// the shifted free Poisson law of rate 1 on [-1, 3]
double fp_pdf(double x) {
  const double u = x + 1;
  return (u > 0 && u < 4) ? std::sqrt(u * (4 - u)) / (2 * std::numbers::pi * u) : 0.0;
}

// integral of f against that law over [lo, hi], with u = v^2 to absorb the 1/sqrt(u) edge
template <class F>
double fp_integral(F f, double lo, double hi) {
  const auto g = [&](double v) {
    const double u = v * v;
    return u < 4 ? f(u - 1) * std::sqrt(4 - u) / std::numbers::pi : 0.0;
  };
  return simpson(g, std::sqrt(lo + 1), std::sqrt(hi + 1), 200000);
}

}  // namespace

TEST_CASE("moments of the closed-form laws") {
  const auto sc = Measure::semicircle();
  // x = 2 sin t removes the square-root edges
  const double sc4 = simpson(
      [](double t) { return std::pow(2 * std::sin(t), 4) * 2 * std::pow(std::cos(t), 2) / std::numbers::pi; },
      -std::numbers::pi / 2, std::numbers::pi / 2);
  CHECK(moment(sc, 4) == doctest::Approx(sc4).epsilon(1e-9));
  CHECK(moment(sc, 4) == doctest::Approx(2.0));
  CHECK(moment(sc, 6) == doctest::Approx(5.0));
  CHECK(moment(sc, 3) == doctest::Approx(0.0));

  const auto fp = Measure::free_poisson(1.0, -1.0);
  const double expected[] = {1, 0, 1, 1, 3, 6};
  for (int k = 0; k <= 5; ++k) CHECK(moment(fp, k) == doctest::Approx(expected[k]).epsilon(1e-10));
  const auto [lo, hi] = fp.support();
  CHECK(lo == doctest::Approx(-1.0));
  CHECK(hi == doctest::Approx(3.0));

  const auto delta0 = Measure::point_mass(0.0);
  for (int k = 1; k <= 8; ++k) CHECK(moment(delta0, k) == 0.0);
  CHECK_THROWS_AS(moment(sc, 17), Error);
}

TEST_CASE("absolute moments") {
  CHECK(absolute_moment(Measure::bernoulli(), 3) == doctest::Approx(1.0));
  CHECK(absolute_moment(Measure::semicircle(), 1) == doctest::Approx(8.0 / (3.0 * std::numbers::pi)).epsilon(1e-9));
  CHECK(absolute_moment(Measure::free_poisson(1.0, -1.0), 2) == doctest::Approx(1.0).epsilon(1e-10));
  const double b3 = fp_integral([](double x) { return std::pow(std::abs(x), 3); }, -1, 3);
  CHECK(absolute_moment(Measure::free_poisson(1.0, -1.0), 3) == doctest::Approx(b3).epsilon(1e-6));
  CHECK(absolute_moment_real(Measure::semicircle(), 1.0) == doctest::Approx(8.0 / (3.0 * std::numbers::pi)).epsilon(1e-8));
}

TEST_CASE("dilation and shift") {
  const auto d = dilate(Measure::semicircle(), 3.0);
  REQUIRE(d.as<Semicircle>() != nullptr);
  CHECK(d.as<Semicircle>()->variance == doctest::Approx(9.0));

  const auto a = dilate(Measure::point_mass(1.0), 2.0);
  CHECK(a.atom_list().at(0).position == 2.0);
  CHECK_THROWS_AS(dilate(Measure::semicircle(), 0.0), Error);

  const auto fp = dilate(Measure::free_poisson(1.0, -1.0), 1.0 / std::sqrt(10.0));
  CHECK(moment(fp, 2) == doctest::Approx(0.1));

  CHECK(shift(Measure::semicircle(), 1.0).mean() == doctest::Approx(1.0));
  CHECK(shift(Measure::point_mass(0.0), -2.0).atom_list().at(0).position == -2.0);
  const auto centered_law = shift(Measure::free_poisson(1.0, 0.0), -1.0);
  CHECK(centered_law.support().first == doctest::Approx(-1.0));
  CHECK(centered_law.support().second == doctest::Approx(3.0));
  CHECK(density(centered_law, 0.5) == doctest::Approx(fp_pdf(0.5)));
}

TEST_CASE("dilation algebra on moments") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> t_dist(-2.0, 2.0);
  const Measure laws[] = {Measure::semicircle(0.3, 0.7), Measure::free_poisson(2.5, -1.0, 0.5),
                          Measure::atoms({{-1.0, 0.25}, {0.5, 0.5}, {2.0, 0.25}})};
  for (const auto& mu : laws) {
    for (int trial = 0; trial < 5; ++trial) {
      double t = t_dist(rng);
      if (std::abs(t) < 0.1) t = 0.5;
      const auto d = dilate(mu, t);
      for (int k = 0; k <= 6; ++k) {
        CHECK(moment(d, k) == doctest::Approx(std::pow(t, k) * moment(mu, k)).epsilon(1e-9).scale(1.0));
      }
    }
  }
}

TEST_CASE("grid measures") {
  Eigen::ArrayXd s(2049);
  for (int i = 0; i < s.size(); ++i) s[i] = sc_pdf(-2.0 + 4.0 * i / 2048.0);
  s /= (s.sum() - 0.5 * (s[0] + s[s.size() - 1])) * (4.0 / 2048.0);
  const auto g = Measure::grid(-2.0, 2.0, s);
  CHECK(total_mass(g) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(moment(g, 2) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(moment(g, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));

  Eigen::ArrayXd tiny(8);
  tiny.setConstant(0.25);
  CHECK_THROWS_AS(Measure::grid(0.0, 4.0, tiny), Error);
  Eigen::ArrayXd negative = Eigen::ArrayXd::Constant(32, 0.25);
  negative[3] = -1.0;
  CHECK_THROWS_AS(Measure::grid(0.0, 4.0, negative), Error);
}

TEST_CASE("atom validation and mass") {
  const auto sorted = Measure::atoms({{1.0, 0.5}, {0.0, 0.5}}).atom_list();
  CHECK(sorted[0].position < sorted[1].position);
  CHECK_THROWS_AS(Measure::atoms({{1.0, 0.5}, {1.0, 0.5}}), Error);
  CHECK_THROWS_AS(Measure::atoms({{0.0, 0.5}, {1.0, -0.5}}), Error);
  CHECK_THROWS_AS(Measure::atoms({{0.0, 0.3}, {1.0, 0.3}}), Error);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Atom> pts;
    double w = 0.0;
    for (int k = 0; k < 5; ++k) {
      pts.push_back({k - 2.0 + 0.1 * trial / 50.0, u(rng)});
      w += pts.back().weight;
    }
    for (auto& p : pts) p.weight /= w;
    const auto mu = Measure::atoms(pts);
    CHECK(total_mass(mu) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(total_mass(dilate(mu, 0.3)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(total_mass(shift(mu, 1.7)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(total_mass(Measure::free_poisson(0.4, 0.0)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(total_mass(Measure::semicircle(2.0, 3.0)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("moment vector bounds") {
  const auto mu = Measure::atoms({{-1.5, 0.2}, {0.25, 0.5}, {1.0, 0.3}});
  const auto mv = moment_vector(mu, 9);
  const double L = mu.support_radius();
  for (int k = 0; k <= 9; ++k) {
    CHECK(mv.absolute[k] >= std::abs(mv.moments[k]) - 1e-15);
    CHECK(std::abs(mv.moments[k]) <= std::pow(L, k) + 1e-12);
  }
}

TEST_CASE("tail moments") {
  CHECK(tail_moment(Measure::point_mass(3.0), 2.5, 2.0) == doctest::Approx(std::pow(3.0, 2.5)));
  CHECK(tail_moment(Measure::semicircle(), 2.0, 2.0) == 0.0);
  CHECK(tail_moment(Measure::bernoulli(), 4.0, 0.5) == doctest::Approx(1.0));
  const auto fp = Measure::free_poisson(1.0, -1.0);
  double prev = tail_moment(fp, 3.0, 0.01);
  for (double t = 0.1; t < 3.5; t += 0.1) {
    const double v = tail_moment(fp, 3.0, t);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
  CHECK(tail_moment(fp, 3.0, 3.5) == 0.0);
  const double oracle = fp_integral([](double x) { return std::pow(std::abs(x), 3); }, 1.0, 3.0);
  CHECK(tail_moment(fp, 3.0, 1.0) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("Lyapunov fractions") {
  CHECK(lyapunov_fraction(1.0, 3.0, 4) == doctest::Approx(0.5));
  CHECK(lyapunov_fraction(2.0, 5.0, 4) == doctest::Approx(0.25));
  CHECK(lyapunov_fraction(Measure::semicircle(), 4.0, 10) == doctest::Approx(0.2));
  const auto tf = tail_functionals(Measure::bernoulli(), 4.0, 3, 16, 0.5);
  CHECK(tf.L_qn == doctest::Approx(absolute_moment(Measure::bernoulli(), 4) / 16.0));
}

TEST_CASE("eta_qs") {
  // q_s = s + 2 with a compact law: the tail term vanishes once eps sqrt(n) > L
  CHECK(eta_qs(Measure::bernoulli(), 5.0, 3, 400) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(eta_qs(Measure::semicircle(), 5.0, 3, 10000) == doctest::Approx(1.0).epsilon(1e-6));

  const auto fp = Measure::free_poisson(1.0, -1.0);
  // brute-force grid minimization oracle
  const auto oracle = [&](double q, int s, int n) {
    const double qs = q_index(q, s);
    const double beta = absolute_moment_real(fp, qs);
    double best = 1e300;
    for (int i = 1; i <= 4000; ++i) {
      const double eps = std::pow(10.0, -6.0 + 5.5 * i / 4000.0);
      if (eps > std::pow(10.0, -0.5)) break;
      best = std::min(best, std::pow(eps, s + 2 - qs) + tail_moment(fp, qs, eps * std::sqrt(n)) / beta * std::pow(eps, -qs));
    }
    return best;
  };
  for (int n : {4, 16, 64}) {
    const double e = eta_qs(fp, 4.5, 3, n);
    CHECK(e > 0.0);
    CHECK(e <= oracle(4.5, 3, n) + 1e-6);
    CHECK(e >= oracle(4.5, 3, n) - 1e-2);
    CHECK(e <= std::pow(10.0, 1.0 + 1.5) + 1.0);
  }
  // compact support: the tail term dies once eps sqrt(n) clears the support, so eta falls with n
  double prev = 1e300;
  for (int n : {4, 16, 64, 256, 1024}) {
    const double e = eta_qs(fp, 4.5, 3, n);
    CHECK(e <= prev + 1e-9);
    prev = e;
  }
  CHECK_THROWS_AS(eta_qs(fp, 3.0, 3, 10), Error);
}

TEST_CASE("standardize") {
  const auto mu = standardize(Measure::atoms({{1.0, 0.25}, {2.0, 0.5}, {4.0, 0.25}}));
  CHECK(mu.mean() == doctest::Approx(0.0).scale(1.0));
  CHECK(mu.variance() == doctest::Approx(1.0));
  CHECK_THROWS_AS(standardize(Measure::point_mass(1.0)), Error);
}

TEST_CASE("measure JSON round trip") {
  const auto mu = Measure::atoms({{-0.1, 0.3}, {0.7, 0.7}});
  const auto back = measure_from_json(to_json(mu));
  const auto a = mu.atom_list(), b = back.atom_list();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].position == b[i].position);
    CHECK(a[i].weight == b[i].weight);
  }
  const auto fp = parse_measure(R"({"type":"free_poisson","rate":1,"shift":-1})");
  CHECK(moment(fp, 3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(parse_measure("{not json"), Error);
  CHECK_THROWS_AS(parse_measure(R"({"type":"semicircle","mean":0})"), Error);
  CHECK_THROWS_AS(parse_measure(R"({"type":"unknown"})"), Error);
}
