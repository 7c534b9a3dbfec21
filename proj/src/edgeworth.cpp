#include "freeclt/edgeworth.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace freeclt {

double chebyshev_u(int n, double x) {
  if (n < 0) throw Error(ErrorKind::Domain, "Chebyshev index must be non-negative");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

cplx coefficient_B(int k, cplx w, const FreeCumulants& kappa) {
  const cplx o = 1.0 - w * w;
  if (std::abs(o) < 1e-12) throw Error(ErrorKind::Singular, "1 - w^2 vanishes");
  const double k3 = kappa(3), k4 = kappa(4), k5 = kappa(5);
  const cplx w2 = w * w, w4 = w2 * w2, w5 = w4 * w;
  switch (k) {
    case 1: return k3 * w4 / o;
    case 2: return (k4 - k3 * k3) * w5 / o + k3 * k3 * (w5 * w2 / (o * o) + w5 / (o * o * o));
    case 3: {
      const cplx w6 = w4 * w2, w8 = w4 * w4, w10 = w8 * w2;
      return k5 * w6 / o - k3 * k4 * w8 * (5.0 * w2 - 7.0) / (o * o * o) +
             k3 * k3 * k3 * w10 * (5.0 * w4 - 15.0 * w2 + 12.0) / (o * o * o * o * o);
    }
    default: throw Error(ErrorKind::UnsupportedOrder, "B_k is available for k = 1, 2, 3");
  }
}

double semicircle_density(double x) {
  const double q = 4.0 - x * x;
  return q > 0.0 ? std::sqrt(q) / (2.0 * std::numbers::pi) : 0.0;
}

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * std::numbers::pi) + std::asin(0.5 * x) / std::numbers::pi;
}

double density_term(int r, double x, const FreeCumulants& kappa) {
  const double k3 = kappa(3), k4 = kappa(4), k5 = kappa(5);
  const double p = semicircle_density(x);
  const double q = 4.0 - x * x;
  const double x2 = x * x, x4 = x2 * x2, x6 = x4 * x2, x8 = x4 * x4;
  switch (r) {
    case 1: return k3 * (x2 - 3.0) * x * p / q;
    case 2:
      return -(k4 * (x6 - 8 * x4 + 18 * x2 - 8) - k3 * k3 * (2 * x6 - 15 * x4 + 30 * x2 - 10)) * p / (q * q);
    case 3:
      return (k5 * (x4 - 5 * x2 + 5) * x / q + k3 * k4 * (5 * x6 - 42 * x4 + 105 * x2 - 70) * x / (q * q) +
              k3 * k3 * k3 * (5 * x8 - 60 * x6 + 252 * x4 - 420 * x2 + 210) * x / (q * q * q)) *
             p;
    default: throw Error(ErrorKind::UnsupportedOrder, "density terms are available for r = 1, 2, 3");
  }
}

double distribution_term(int r, double x, const FreeCumulants& kappa) {
  const double k3 = kappa(3), k4 = kappa(4), k5 = kappa(5);
  const double p = semicircle_density(x);
  const double q = 4.0 - x * x;
  const auto U = [x](int k) { return chebyshev_u(k, 0.5 * x); };
  switch (r) {
    case 1: return -k3 * U(2) * p / 3.0;
    case 2: return (-k4 * U(3) + 2.0 * k3 * k3 * (U(3) + U(1) - U(1) / q)) * p / 4.0;
    case 3:
      return (-k5 / 5.0 * U(4) - k3 * k4 / q * (U(6) - U(4)) -
              k3 * k3 * k3 / (3.0 * q * q) * (3.0 * U(8) - 7.0 * U(6) + 4.0 * U(4))) *
             p;
    default: throw Error(ErrorKind::UnsupportedOrder, "distribution terms are available for r = 1, 2, 3");
  }
}

namespace {

void check_common(int n, int order) {
  if (n < 1) throw Error(ErrorKind::Domain, "n must be positive");
  if (order < 0 || order > 3) throw Error(ErrorKind::UnsupportedOrder, "expansion order must be 0..3");
}

void check_real(double x, const EvalWindow& window) {
  if (!(x >= window.K.x_lo && x <= window.K.x_hi)) {
    throw Error(ErrorKind::Window, "x = " + std::to_string(x) + " outside [-2 + 2 delta, 2 - 2 delta]");
  }
}

void sum_orders(ExpansionSeries& s) {
  const double rn = std::sqrt(static_cast<double>(s.n));
  cplx total = 0.0;
  double scale = 1.0;
  for (int r = 0; r < 4; ++r) {
    if (r > s.order) s.orders[r] = 0.0;
    total += s.orders[r] * scale;
    scale /= rn;
  }
  s.total = total;
}

}  // namespace

ExpansionSeries expand_cauchy(cplx z, const FreeCumulants& kappa, int n, int order, const EvalWindow& window) {
  check_common(n, order);
  if (!window.K.contains(z)) throw Error(ErrorKind::Window, "z outside the window K");
  ExpansionSeries s{ExpansionKind::Cauchy, {}, 0.0, n, order, z, kappa, false};
  const cplx G = semicircle_cauchy(z);
  s.orders[0] = G;
  for (int r = 1; r <= order; ++r) s.orders[r] = coefficient_B(r, G, kappa);
  sum_orders(s);
  return s;
}

ExpansionSeries expand_density(double x, const FreeCumulants& kappa, int n, int order, const EvalWindow& window) {
  check_common(n, order);
  check_real(x, window);
  ExpansionSeries s{ExpansionKind::Density, {}, 0.0, n, order, x, kappa, false};
  s.orders[0] = semicircle_density(x);
  for (int r = 1; r <= order; ++r) s.orders[r] = density_term(r, x, kappa);
  sum_orders(s);
  if (s.total.real() < 0.0) {
    s.total = 0.0;
    s.clamped = true;
  }
  return s;
}

ExpansionSeries expand_distribution(double a, double b, const FreeCumulants& kappa, int n, int order,
                                    const EvalWindow& window) {
  check_common(n, order);
  check_real(a, window);
  check_real(b, window);
  if (a > b) throw Error(ErrorKind::Domain, "expand_distribution needs a <= b");
  ExpansionSeries s{ExpansionKind::Distribution, {}, 0.0, n, order, b, kappa, false};
  s.orders[0] = semicircle_cdf(b) - semicircle_cdf(a);
  for (int r = 1; r <= order; ++r) s.orders[r] = distribution_term(r, b, kappa) - distribution_term(r, a, kappa);
  sum_orders(s);
  return s;
}

CGCoefficients cg_coefficients(const FreeCumulants& kappa, int n) {
  if (n < 1) throw Error(ErrorKind::Domain, "n must be positive");
  const double k3 = kappa(3), k4 = kappa(4);
  const double dn = static_cast<double>(n);
  CGCoefficients c{};
  c.a_n = k3 / std::sqrt(dn);
  c.b_n = (k4 - k3 * k3 + 1.0) / dn;
  c.d_n = (k4 - k3 * k3 + 2.0) / dn;
  if (!(c.d_n < 1.0)) throw Error(ErrorKind::Domain, "d_n >= 1 leaves E_n undefined");
  c.E_n = (1.0 - c.b_n) / std::sqrt(1.0 - c.d_n);
  return c;
}

CGValue cg_expand_distribution(double x, const FreeCumulants& kappa, int n) {
  const auto c = cg_coefficients(kappa, n);
  const double u1 = chebyshev_u(1, 0.5 * x), u2 = chebyshev_u(2, 0.5 * x), u3 = chebyshev_u(3, 0.5 * x);
  const double bracket = c.a_n * c.a_n / 2.0 * u1 + c.a_n / 3.0 * (3.0 - u2) -
                         (c.b_n - c.a_n * c.a_n - 1.0 / n) / 4.0 * u3;
  return {semicircle_cdf(x) + bracket * semicircle_density(x), std::numeric_limits<double>::quiet_NaN()};
}

CGValue cg_expand_distribution(double x, const Measure& mu, double q, int n) {
  if (!(q >= 4.0)) throw Error(ErrorKind::Domain, "the remainder envelope needs q >= 4");
  auto v = cg_expand_distribution(x, free_cumulants(mu, 5), n);
  if (q >= 5.0) {
    v.remainder_bound = lyapunov_fraction(mu, 5.0, n);
  } else {
    v.remainder_bound = eta_qs(mu, q, 3, n) * lyapunov_fraction(mu, q, n) +
                        std::pow(lyapunov_fraction(mu, 4.0, n), 1.5);
  }
  return v;
}

CGValue cg_expand_density(double x, const FreeCumulants& kappa, int n, std::optional<double> h) {
  const auto c = cg_coefficients(kappa, n);
  const double dn = static_cast<double>(n);
  const double step = h.value_or(std::pow(dn, -1.5));
  if (!(step > 0.0)) throw Error(ErrorKind::Domain, "h must be positive");
  const double edge = 2.0 / c.E_n;
  if (!(std::abs(x) <= edge - step)) {
    throw Error(ErrorKind::Window, "x outside [-2/E_n + h, 2/E_n - h]");
  }
  const double poly = 1.0 + c.d_n / 2.0 - c.a_n * c.a_n - 1.0 / dn - c.a_n * x -
                      (c.b_n - c.a_n * c.a_n - 1.0 / dn) * x * x;
  const double ex = c.E_n * x;
  return {poly * semicircle_density(ex), 1.0 / (std::pow(dn, 1.5) * std::sqrt(4.0 - ex * ex))};
}

}  // namespace freeclt
