#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "freeclt/errors.hpp"
#include "freeclt/freeconv.hpp"
#include "freeclt/nk.hpp"

using namespace freeclt;

namespace {

const Measure half = Measure::semicircle(0.0, 0.5);

cplx g_half(cplx w) { return cauchy(half, w); }

// F'(t) straight from the definition of F
Mat2 jacobian(const Vec2& t, cplx z, const Measure& nu1, const Measure& nu2) {
  const cplx u = 1.0 / (z - t[0] - t[1]);
  const cplx c = u * u;
  return {{{c + cauchy_derivative(nu1, t[0], 1), c}, {c, c + cauchy_derivative(nu2, t[1], 1)}}};
}

Vec2 cramer(const Mat2& a, const Vec2& b) {
  const cplx det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  return {(b[0] * a[1][1] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - b[0] * a[1][0]) / det};
}

// FreePoisson(1,-1) CLT law at stage m, dilated by 1/sqrt 2
Measure fp_half_stage(double m) {
  const double r = std::sqrt(m);
  return dilate(Measure::free_poisson(m, -r, 1.0 / r), 1.0 / std::sqrt(2.0));
}

}  // namespace

TEST_CASE("Newton-Kantorovich certificate algebra") {
  const auto c = certify(1.0, 0.1, 1.0);
  CHECK(c.h0 == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(c.pass);
  REQUIRE(c.radius);
  CHECK(std::abs(*c.radius - 0.10557280900008412) < 1e-9);
  CHECK(std::abs(*c.radius - (1 - std::sqrt(1 - 2 * c.h0)) / c.h0 * c.eta0) < 1e-15);

  const auto edge = certify(1.0, 0.5, 1.0);
  CHECK(edge.pass);
  CHECK(*edge.radius == doctest::Approx(1.0));

  const auto bad = certify(2.0, 1.0, 1.0);
  CHECK(bad.h0 == 2.0);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.radius);

  const auto tiny = certify(1.0, 0.3, 0.0);
  CHECK(tiny.pass);
  CHECK(*tiny.radius == doctest::Approx(0.3));
  CHECK_THROWS_AS(certify(-1.0, 0.1, 1.0), Error);

  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 2.0), grow(1.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const double b = u(rng), e = u(rng), K = u(rng);
    const bool base = certify(b, e, K).pass;
    const double f = grow(rng);
    if (!base) {
      CHECK_FALSE(certify(b * f, e, K).pass);
      CHECK_FALSE(certify(b, e * f, K).pass);
      CHECK_FALSE(certify(b, e, K * f).pass);
    }
    CHECK(certify(b, e, K).h0 == b * e * K);
  }
}

TEST_CASE("reference subordination") {
  CHECK(std::abs(reference_subordination(0.0) - cplx(0, 0.5)) < 1e-15);
  CHECK(std::abs(reference_subordination(2.0) - 1.5) < 1e-15);
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> ux(-1.95, 1.95), uy(0.0, 0.05);
  for (int k = 0; k < 200; ++k) {
    const cplx z(ux(rng), uy(rng));
    const cplx Z = reference_subordination(z);
    CHECK(std::abs(z - (2.0 * Z - 1.0 / g_half(Z))) < 1e-12);
  }
  for (double d : {0.01, 0.05, 0.1})
    for (double x = -2 + d; x <= 2 - d; x += 0.01) CHECK(reference_subordination(x).imag() > std::sqrt(d) / 3);
}

TEST_CASE("the subordination system") {
  const cplx z(0.4, 0.01);
  const cplx Z = reference_subordination(z);
  const Vec2 t{Z, Z};
  for (const cplx& v : eval_F(t, z, half, half)) CHECK(std::abs(v) < 1e-12);
  const auto moved = eval_F({Z + 1e-3, Z}, z, half, half);
  CHECK(std::abs(moved[0]) > 1e-6);
  CHECK_THROWS_AS(eval_F({z / 2.0, z / 2.0}, z, half, half), Error);

  // the pair solver output is a root
  const auto fp = Measure::free_poisson(1.0, -1.0);
  const auto b = Measure::bernoulli();
  for (cplx p : {cplx(0.2, 0.3), cplx(-1.0, 1.0)}) {
    const auto sol = convolve_pair(fp, b, p);
    for (const cplx& v : eval_F({sol.Z1, sol.Z2}, p, fp, b)) CHECK(std::abs(v) <= 1e-9);
  }

  const auto sp = system_point(t, z, half, half, half, half);
  CHECK(std::abs(sp.S_values[0]) < 1e-15);
  CHECK(std::abs(sp.det_Fprime - reference_det(z)) < 1e-10);
}

TEST_CASE("Newton step against a direct linear solve") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> ux(-1.9, 1.9), uy(0.001, 0.03), uv(0.35, 0.65);
  for (int k = 0; k < 100; ++k) {
    const cplx z(ux(rng), uy(rng));
    const Vec2 t0{reference_subordination(z), reference_subordination(z)};
    const auto nu1 = Measure::semicircle(0.0, uv(rng));
    const auto nu2 = k % 2 ? Measure::semicircle(0.02, uv(rng)) : dilate(Measure::free_poisson(40.0, -std::sqrt(40.0), 1 / std::sqrt(40.0)), std::sqrt(uv(rng)));
    const Vec2 step = eval_newton_step(t0, z, nu1, nu2, half, half);
    const Vec2 direct = cramer(jacobian(t0, z, nu1, nu2), eval_F(t0, z, nu1, nu2));
    for (int j = 0; j < 2; ++j) CHECK(std::abs(step[j] - direct[j]) <= 1e-12 * std::max(1.0, std::abs(direct[j])));

    const Mat2 fp = eval_F_prime(t0, nu1, nu2, half, half);
    const Mat2 jac = jacobian(t0, z, nu1, nu2);
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 2; ++c) CHECK(std::abs(fp[a][c] - jac[a][c]) <= 1e-12 * std::max(1.0, std::abs(jac[a][c])));
  }
  const cplx z(0.3, 0.01);
  const Vec2 t0{reference_subordination(z), reference_subordination(z)};
  const Vec2 zero = eval_newton_step(t0, z, half, half, half, half);
  CHECK(vector_norm(zero) < 1e-14);
  const auto nu = Measure::semicircle(0.0, 0.55);
  const Vec2 sym = eval_newton_step(t0, z, nu, nu, half, half);
  CHECK(std::abs(sym[0] - sym[1]) < 1e-14);
}

TEST_CASE("second derivative of the system") {
  const cplx z(-0.7, 0.005);
  const cplx Z = reference_subordination(z);
  const Vec2 t0{Z, Z};
  const Second s = eval_F_second(t0, z, half, half, half, half);
  const cplx G = g_half(Z);
  const cplx D = cauchy_derivative(half, Z, 2) - 2.0 * G * G * G;
  CHECK(std::abs(s[0][0] - D) < 1e-12);
  CHECK(std::abs(s[1][3] - D) < 1e-12);
  CHECK(std::abs(s[0][1] + 2.0 * G * G * G) < 1e-12);

  // the second-order term through the closed form of G'' at the reference point
  for (double x : {-1.5, 0.0, 0.4, 1.8}) {
    const cplx zz(x, 0.0);
    const cplx q = std::sqrt(4.0 - zz * zz);
    const cplx closed = 2.0 * cplx(0, 1) * std::pow(3.0 * q + cplx(0, 1) * zz, 3) / std::pow(9.0 - 2.0 * zz * zz, 3);
    CHECK(std::abs(cauchy_derivative(half, reference_subordination(zz), 2) - closed) < 1e-10);
  }

  // central differences of the analytic Jacobian
  const Measure nu1 = Measure::semicircle(0.0, 0.6), nu2 = Measure::semicircle(0.1, 0.45);
  const Vec2 t{Z + cplx(0.01, 0.02), Z - cplx(0.015, -0.01)};
  const Second at = eval_F_second_at(t, z, nu1, nu2);
  const double h = 1e-5;
  for (int b = 0; b < 2; ++b) {
    Vec2 tp = t, tm = t;
    tp[b] += h;
    tm[b] -= h;
    const Mat2 jp = jacobian(tp, z, nu1, nu2), jm = jacobian(tm, z, nu1, nu2);
    for (int j = 0; j < 2; ++j)
      for (int a = 0; a < 2; ++a) CHECK(std::abs((jp[j][a] - jm[j][a]) / (2 * h) - at[j][2 * a + b]) < 1e-6);
  }

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ux(-1.9, 1.9), uy(0.0, 0.09);
  for (int k = 0; k < 200; ++k) {
    const cplx Zr = reference_subordination(cplx(ux(rng), uy(rng)));
    CHECK(std::abs(g_half(Zr)) <= std::sqrt(2.0) + 1e-12);
  }
}

TEST_CASE("linear algebra helpers") {
  const Mat2 a{{{cplx(1, 2), cplx(0, 1)}, {cplx(-1, 0), cplx(3, -1)}}};
  const Mat2 ai = inverse(a);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const cplx v = a[r][0] * ai[0][c] + a[r][1] * ai[1][c];
      CHECK(std::abs(v - (r == c ? 1.0 : 0.0)) < 1e-14);
    }
  // largest singular value by power iteration on A^H A
  Vec2 v{1.0, 0.3};
  for (int it = 0; it < 200; ++it) {
    const Vec2 w{a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]};
    const Vec2 y{std::conj(a[0][0]) * w[0] + std::conj(a[1][0]) * w[1], std::conj(a[0][1]) * w[0] + std::conj(a[1][1]) * w[1]};
    const double n = vector_norm(y);
    v = {y[0] / n, y[1] / n};
  }
  const Vec2 av{a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]};
  CHECK(operator_norm(a) == doctest::Approx(vector_norm(av)).epsilon(1e-12));
  CHECK(vector_norm({cplx(3, 0), cplx(0, 4)}) == doctest::Approx(5.0));
  const Mat2 singular{{{1.0, 2.0}, {2.0, 4.0}}};
  CHECK_THROWS_AS(inverse(singular), Error);
}

TEST_CASE("determinant of the symmetric system") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> ux(-1.9, 1.9), uy(0.0, 0.03);
  for (int k = 0; k < 200; ++k) {
    const cplx z(ux(rng), uy(rng));
    const cplx Z = reference_subordination(z);
    const Mat2 f = eval_F_prime({Z, Z}, half, half, half, half);
    CHECK(std::abs(f[0][0] * f[1][1] - f[0][1] * f[1][0] - reference_det(z)) <= 1e-10);
  }
  // |g| at the edge behaves like sqrt(delta) once delta is small
  std::vector<double> ld, lg;
  for (double d : {0.0005, 0.001, 0.002, 0.004}) {
    ld.push_back(std::log(d));
    lg.push_back(std::log(std::abs(reference_det(2.0 - d))));
  }
  const double slope = (lg.back() - lg.front()) / (ld.back() - ld.front());
  CHECK(slope == doctest::Approx(0.5).epsilon(0.3));
  // and in the interior it stays away from zero
  double m = 1e300;
  for (double x = -1.9; x <= 1.9; x += 0.001) m = std::min(m, std::abs(reference_det(x)));
  CHECK(m > 0.5);
}

TEST_CASE("sampled subordination certificates") {
  const auto exact = certify_subordination(half, half, 0.05, 32);
  CHECK(exact.eta0 <= 1e-10);
  CHECK(exact.pass);
  CHECK(exact.empirical);

  const auto far = certify_subordination(dilate(Measure::bernoulli(), 1 / std::sqrt(2.0)),
                                         dilate(Measure::bernoulli(), 1 / std::sqrt(2.0)), 0.01, 16);
  CHECK_FALSE(far.pass);

  // free Poisson stages approach omega_{1/2} and eventually certify
  const auto coarse = certify_subordination(fp_half_stage(64), fp_half_stage(64), 0.05, 32);
  const auto fine = certify_subordination(fp_half_stage(8192), fp_half_stage(8192), 0.05, 32);
  CHECK(fine.eta0 < coarse.eta0);
  CHECK_FALSE(coarse.pass);
  CHECK(fine.pass);

  CHECK_THROWS_AS(certify_subordination(half, half, 0.5, 16), Error);
  CHECK_THROWS_AS(certify_subordination(half, half, 0.0, 16), Error);
}
