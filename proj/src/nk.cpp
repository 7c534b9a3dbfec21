#include "freeclt/nk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "freeclt/parallel.hpp"

namespace freeclt {

NKCertificate certify(double beta0, double eta0, double K0) {
  if (!(beta0 >= 0.0) || !(eta0 >= 0.0) || !(K0 >= 0.0)) {
    throw Error(ErrorKind::Domain, "NK constants must be non-negative");
  }
  NKCertificate c;
  c.beta0 = beta0;
  c.eta0 = eta0;
  c.K0 = K0;
  const bool finite = std::isfinite(beta0) && std::isfinite(eta0) && std::isfinite(K0);
  c.h0 = finite ? beta0 * eta0 * K0 : std::numeric_limits<double>::infinity();
  c.pass = c.h0 <= 0.5;
  if (c.pass) {
    // (1 - sqrt(1 - 2h)) / h = 2 / (1 + sqrt(1 - 2h)) avoids the cancellation near h = 0
    c.radius = 2.0 * eta0 / (1.0 + std::sqrt(1.0 - 2.0 * c.h0));
  }
  return c;
}

cplx reference_subordination(cplx z) { return (3.0 * z + cplx(0.0, 1.0) * std::sqrt(4.0 - z * z)) / 4.0; }

namespace {

cplx resolvent(const Vec2& t, cplx z) {
  const cplx d = z - t[0] - t[1];
  if (d == 0.0) throw Error(ErrorKind::Pole, "z - t1 - t2 vanishes");
  return 1.0 / d;
}

const Measure& half_semicircle() {
  static const Measure m = Measure::semicircle(0.0, 0.5);
  return m;
}

}  // namespace

Vec2 eval_F(const Vec2& t, cplx z, const Measure& nu1, const Measure& nu2) {
  const cplx q = resolvent(t, z);
  return {q + cauchy(nu1, t[0]), q + cauchy(nu2, t[1])};
}

NKSystemPoint system_point(const Vec2& t0, cplx z, const Measure& nu1, const Measure& nu2, const Measure& mu1,
                           const Measure& mu2) {
  NKSystemPoint p;
  p.z = z;
  p.t0 = t0;
  p.F_value = eval_F(t0, z, nu1, nu2);
  p.S_values = {cauchy(nu1, t0[0]) - cauchy(mu1, t0[0]), cauchy(nu2, t0[1]) - cauchy(mu2, t0[1])};
  const Mat2 J = eval_F_prime(t0, nu1, nu2, mu1, mu2);
  p.det_Fprime = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  return p;
}

Mat2 eval_F_prime(const Vec2& t0, const Measure& nu1, const Measure& nu2, const Measure& mu1, const Measure& mu2) {
  const cplx g1 = cauchy(mu1, t0[0]), g2 = cauchy(mu2, t0[1]);
  const cplx d1 = cauchy_derivative(nu1, t0[0], 1), d2 = cauchy_derivative(nu2, t0[1], 1);
  return {{{d1 + g1 * g1, g1 * g1}, {g2 * g2, d2 + g2 * g2}}};
}

Vec2 eval_newton_step(const Vec2& t0, cplx z, const Measure& nu1, const Measure& nu2, const Measure& mu1,
                      const Measure& mu2) {
  (void)z;
  const cplx g1 = cauchy(mu1, t0[0]), g2 = cauchy(mu2, t0[1]);
  const cplx s1 = cauchy(nu1, t0[0]) - g1, s2 = cauchy(nu2, t0[1]) - g2;
  const cplx a1 = cauchy_derivative(nu1, t0[0], 1) + g1 * g1;
  const cplx a2 = cauchy_derivative(nu2, t0[1], 1) + g2 * g2;
  const cplx det = a1 * a2 - g1 * g1 * g2 * g2;
  if (std::abs(det) < 1e-14) throw Error(ErrorKind::Singular, "det F'(t0) vanishes");
  return {(a2 * s1 - g1 * g1 * s2) / det, (a1 * s2 - g2 * g2 * s1) / det};
}

Second eval_F_second(const Vec2& t0, cplx z, const Measure& nu1, const Measure& nu2, const Measure& mu1,
                     const Measure& mu2) {
  (void)z;
  const cplx g1 = cauchy(mu1, t0[0]), g2 = cauchy(mu2, t0[1]);
  const cplx c1 = -2.0 * g1 * g1 * g1, c2 = -2.0 * g2 * g2 * g2;
  const cplx D1 = cauchy_derivative(nu1, t0[0], 2) + c1;
  const cplx D2 = cauchy_derivative(nu2, t0[1], 2) + c2;
  return {{{D1, c1, c1, c1}, {c2, c2, c2, D2}}};
}

Second eval_F_second_at(const Vec2& t, cplx z, const Measure& nu1, const Measure& nu2) {
  const cplx q = resolvent(t, z);
  const cplx c = 2.0 * q * q * q;
  return {{{cauchy_derivative(nu1, t[0], 2) + c, c, c, c}, {c, c, c, cauchy_derivative(nu2, t[1], 2) + c}}};
}

double operator_norm(const Mat2& a) {
  double fro = 0.0;
  for (const auto& row : a) {
    for (const cplx& v : row) fro += std::norm(v);
  }
  const double det = std::abs(a[0][0] * a[1][1] - a[0][1] * a[1][0]);
  const double disc = std::max(0.0, fro * fro - 4.0 * det * det);
  return std::sqrt(0.5 * (fro + std::sqrt(disc)));
}

double second_norm(const Second& s) {
  double best = 0.0;
  for (const auto& row : s) {
    double sum = 0.0;
    for (const cplx& v : row) sum += std::abs(v);
    best = std::max(best, sum);
  }
  return best;
}

double vector_norm(const Vec2& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

Mat2 inverse(const Mat2& a) {
  const cplx det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (std::abs(det) < 1e-14) throw Error(ErrorKind::Singular, "2x2 matrix is singular");
  return {{{a[1][1] / det, -a[0][1] / det}, {-a[1][0] / det, a[0][0] / det}}};
}

cplx reference_det(cplx z) {
  const cplx G = semicircle_cauchy(z);
  const cplx d = cauchy_derivative(half_semicircle(), reference_subordination(z), 1);
  const cplx G2 = G * G;
  return (G2 + d) * (G2 + d) - G2 * G2;
}

NKCertificate certify_subordination(const Measure& nu1, const Measure& nu2, double delta, int z_samples) {
  if (!(delta > 0.0 && delta <= 0.1)) throw Error(ErrorKind::Domain, "delta must lie in (0, 1/10]");
  if (z_samples < 2) throw Error(ErrorKind::Domain, "need at least two z samples");
  constexpr int kBallSamples = 128;
  const int nx = z_samples, ny = std::max(4, z_samples / 4);
  const double inf = std::numeric_limits<double>::infinity();
  const double y_top = delta * std::sqrt(delta);
  const Measure& mu = half_semicircle();

  struct Local {
    double beta = 0.0, eta = 0.0;
  };
  std::vector<Local> first(static_cast<std::size_t>(nx * ny));
  const auto point = [&](std::size_t k) {
    const int i = static_cast<int>(k) / ny, j = static_cast<int>(k) % ny;
    const double x = -2.0 + delta + (4.0 - 2.0 * delta) * i / (nx - 1);
    const double y = y_top * (j + 0.5) / ny;
    return cplx(x, y);
  };
  parallel_for(first.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const cplx z = point(k);
      const cplx Z = reference_subordination(z);
      const Vec2 t0{Z, Z};
      try {
        first[k].beta = operator_norm(inverse(eval_F_prime(t0, nu1, nu2, mu, mu)));
        first[k].eta = vector_norm(eval_newton_step(t0, z, nu1, nu2, mu, mu));
      } catch (const Error&) {
        first[k] = {inf, inf};
      }
    }
  });
  double beta0 = 0.0, eta0 = 0.0;
  for (const auto& l : first) {
    beta0 = std::max(beta0, l.beta);
    eta0 = std::max(eta0, l.eta);
  }
  if (!std::isfinite(beta0) || !std::isfinite(eta0)) {
    auto c = certify(beta0, eta0, inf);
    c.empirical = true;
    return c;
  }

  std::vector<double> second(first.size(), 0.0);
  const double ball = 2.0 * eta0;
  parallel_for(second.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const cplx z = point(k);
      const cplx Z = reference_subordination(z);
      std::mt19937_64 rng(0x5eedULL + k);
      std::normal_distribution<double> normal;
      std::uniform_real_distribution<double> uniform;
      double sup = 0.0;
      try {
        for (int s = 0; s <= kBallSamples; ++s) {
          Vec2 t{Z, Z};
          if (s > 0) {
            double dir[4], len = 0.0;
            for (double& d : dir) {
              d = normal(rng);
              len += d * d;
            }
            len = std::sqrt(len);
            // s == 1..16 sit on the sphere, the rest fill the ball uniformly
            const double r = ball * (s <= 16 ? 1.0 : std::pow(uniform(rng), 0.25)) / len;
            t[0] += r * cplx(dir[0], dir[1]);
            t[1] += r * cplx(dir[2], dir[3]);
          }
          sup = std::max(sup, second_norm(eval_F_second_at(t, z, nu1, nu2)));
        }
      } catch (const Error&) {
        sup = inf;
      }
      second[k] = sup;
    }
  });
  const double K0 = *std::max_element(second.begin(), second.end());
  auto c = certify(beta0, eta0, K0);
  c.empirical = true;
  return c;
}

}  // namespace freeclt
