#include "freeclt/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace freeclt {
namespace {

constexpr cplx I{0.0, 1.0};

// sqrt((z - a)(z - b)) with the branch used by the closed-form laws:
// i sqrt(z - a) sqrt(b - z) on the upper half plane and across (a, b),
// the principal product elsewhere.
cplx edge_root(cplx z, double a, double b) {
  const bool inside = z.real() > a && z.real() < b;
  if (z.imag() > 0.0 || inside) return I * std::sqrt(z - a) * std::sqrt(b - z);
  return std::sqrt(z - a) * std::sqrt(z - b);
}

cplx log1p_c(cplx w) {
  const double x = w.real(), y = w.imag();
  return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
}

using Jet = CauchyJet;

Jet semicircle_jet(cplx z, double mean, double var) {
  const double r = 2.0 * std::sqrt(var);
  const cplx w = z - mean;
  const cplx s = edge_root(z, mean - r, mean + r);
  // the two roots of var G^2 - w G + 1 = 0 multiply to 1/var
  const cplx plus = w + s;
  const cplx minus = w - s;
  const cplx g = std::abs(plus) >= std::abs(minus) ? 2.0 / plus : minus / (2.0 * var);
  const cplx den = 2.0 * var * g - w;
  const cplx d1 = g / den;
  const cplx d2 = (2.0 * d1 - 2.0 * var * d1 * d1) / den;
  return {g, d1, d2};
}

// Unit-jump free Poisson: u G^2 + (rate - 1 - u) G + 1 = 0.
Jet mp_jet(cplx u, double rate) {
  const double rl = std::sqrt(rate);
  const double a = (1.0 - rl) * (1.0 - rl);
  const double b = (1.0 + rl) * (1.0 + rl);
  const cplx s = edge_root(u, a, b);
  const cplx p = u + 1.0 - rate;
  const cplx den_root = p + s;
  cplx g;
  if (std::abs(den_root) >= std::abs(p - s)) {
    if (den_root == 0.0) throw Error(ErrorKind::Pole, "free Poisson Cauchy transform at its atom");
    g = 2.0 / den_root;
  } else {
    g = (p - s) / (2.0 * u);
  }
  const cplx den = 2.0 * u * g + rate - 1.0 - u;
  const cplx d1 = (g - g * g) / den;
  const cplx d2 = (2.0 * d1 - 4.0 * g * d1 - 2.0 * u * d1 * d1) / den;
  return {g, d1, d2};
}

Jet free_poisson_jet(cplx z, const FreePoisson& p) {
  if (p.rate < 1.0 && z == cplx(p.shift, 0.0)) {
    throw Error(ErrorKind::Pole, "z sits on the free Poisson atom");
  }
  const cplx u = (z - p.shift) / p.scale;
  Jet j;
  if (p.scale > 0) {
    j = mp_jet(u, p.rate);
  } else {
    // u lives in the opposite half plane; continue from the side z comes from
    const Jet c = mp_jet(std::conj(u), p.rate);
    j = {std::conj(c.g), std::conj(c.d1), std::conj(c.d2)};
  }
  const double s = p.scale;
  return {j.g / s, j.d1 / (s * s), j.d2 / (s * s * s)};
}

Jet atoms_jet(cplx z, const Atoms& a) {
  Jet j{0.0, 0.0, 0.0};
  for (const auto& p : a.points) {
    const cplx u = z - p.position;
    if (u == 0.0) throw Error(ErrorKind::Pole, "z sits on an atom at " + std::to_string(p.position));
    const cplx inv = 1.0 / u;
    j.g += p.weight * inv;
    j.d1 -= p.weight * inv * inv;
    j.d2 += 2.0 * p.weight * inv * inv * inv;
  }
  return j;
}

// Exact Cauchy integral of the piecewise-linear interpolant.
Jet grid_jet(cplx z, const GridDensity& g) {
  const double h = g.spacing();
  const double floor_y = 4.0 * h;
  const bool near = z.real() >= g.a - floor_y && z.real() <= g.b + floor_y;
  if (near && std::abs(z.imag()) < floor_y) {
    throw Error(ErrorKind::Accuracy, "grid Cauchy transform needs |Im z| >= 4 * spacing near the support");
  }
  const auto n = g.samples.size();
  cplx G = 0.0, slope_log = 0.0, slope_inv = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double x0 = g.node(i);
    const double p0 = g.samples[i];
    const double s = (g.samples[i + 1] - p0) / h;
    const cplx u0 = z - x0;
    const cplx u1 = u0 - h;
    const cplx L = log1p_c(h / u1);
    G += (p0 + s * u0) * L - s * h;
    slope_log += s * L;
    slope_inv += s * (1.0 / u1 - 1.0 / u0);
  }
  const cplx ua = z - g.a, ub = z - g.b;
  const double pa = g.samples[0], pb = g.samples[n - 1];
  const cplx int2 = pb / ub - pa / ua - slope_log;
  const cplx int3 = pb / (2.0 * ub * ub) - pa / (2.0 * ua * ua) - 0.5 * slope_inv;
  return {G, -int2, 2.0 * int3};
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Jet jet(const Measure& mu, cplx z) {
  return std::visit(overloaded{
                        [z](const Atoms& a) { return atoms_jet(z, a); },
                        [z](const Semicircle& s) { return semicircle_jet(z, s.mean, s.variance); },
                        [z](const FreePoisson& p) { return free_poisson_jet(z, p); },
                        [z](const GridDensity& g) { return grid_jet(z, g); },
                    },
                    mu.variant());
}

}  // namespace

CauchyJet cauchy_jet(const Measure& mu, cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw Error(ErrorKind::Domain, "non-finite z");
  return jet(mu, z);
}

cplx semicircle_cauchy(cplx z, double mean, double variance) {
  return semicircle_jet(z, mean, variance).g;
}

cplx cauchy(const Measure& mu, cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw Error(ErrorKind::Domain, "non-finite z");
  return jet(mu, z).g;
}

cplx cauchy_derivative(const Measure& mu, cplx z, int order) {
  const Jet j = jet(mu, z);
  switch (order) {
    case 0: return j.g;
    case 1: return j.d1;
    case 2: return j.d2;
    default: throw Error(ErrorKind::UnsupportedOrder, "Cauchy derivative order must be 0, 1 or 2");
  }
}

cplx reciprocal_transform(const Measure& mu, cplx z) {
  const cplx g = cauchy(mu, z);
  if (g == 0.0) throw Error(ErrorKind::Division, "G vanishes, F = 1/G undefined");
  return 1.0 / g;
}

FreeCumulants cumulants_from_moments(const MomentVector& mv, int K) {
  if (K > kMaxCumulantOrder) {
    throw Error(ErrorKind::UnsupportedOrder, "cumulants are available through order 9");
  }
  if (K < 1 || mv.order() < K) throw Error(ErrorKind::UnsupportedOrder, "not enough moments for order K");
  if (std::abs(mv.moments[0] - 1.0) > 1e-12) throw Error(ErrorKind::InvalidMeasure, "m_0 must be 1");
  const auto& m = mv.moments;
  // pw[k][j] = [x^j] M(x)^k, M(x) = sum m_j x^j
  std::vector<std::vector<double>> pw(K + 1, std::vector<double>(K + 1, 0.0));
  pw[0][0] = 1.0;
  for (int k = 1; k <= K; ++k) {
    for (int j = 0; j <= K; ++j) {
      double s = 0.0;
      for (int i = 0; i <= j; ++i) s += pw[k - 1][j - i] * m[i];
      pw[k][j] = s;
    }
  }
  FreeCumulants fc;
  fc.kappa.resize(K);
  for (int n = 1; n <= K; ++n) {
    double s = m[n];
    for (int k = 1; k < n; ++k) s -= fc.kappa[k - 1] * pw[k][n - k];
    fc.kappa[n - 1] = s;
  }
  return fc;
}

MomentVector moments_from_cumulants(const FreeCumulants& kappa, int K) {
  if (K < 0 || K > kMaxMomentOrder) throw Error(ErrorKind::UnsupportedOrder, "moment order out of range");
  MomentVector mv;
  mv.moments.assign(K + 1, 0.0);
  mv.moments[0] = 1.0;
  for (int n = 1; n <= K; ++n) {
    // [x^{n-k}] M^k only involves m_0 .. m_{n-1}
    std::vector<double> power(n, 0.0);
    power[0] = 1.0;
    double s = 0.0;
    for (int k = 1; k <= n; ++k) {
      std::vector<double> next(n, 0.0);
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= j; ++i) next[j] += power[j - i] * mv.moments[i];
      }
      power = std::move(next);
      s += kappa(k) * power[n - k];
    }
    mv.moments[n] = s;
  }
  return mv;
}

std::vector<double> r_series(const Measure& mu, int K) { return free_cumulants(mu, K).kappa; }

FreeCumulants free_cumulants(const Measure& mu, int K) {
  if (K > kMaxCumulantOrder) throw Error(ErrorKind::UnsupportedOrder, "cumulants are available through order 9");
  MomentVector mv;
  for (int k = 0; k <= K; ++k) mv.moments.push_back(moment(mu, k));
  auto fc = cumulants_from_moments(mv, K);
  fc.support_radius = mu.support_radius();
  return fc;
}

double cumulant_bound(double L, int l) {
  if (l < 2) throw Error(ErrorKind::Domain, "cumulant bound needs l >= 2");
  return 2.0 * L / (l - 1) * std::pow(4.0 * L, l - 1);
}

namespace {

double clamp_density(double v) {
  if (v >= 0.0) return v;
  if (v >= -1e-8) return 0.0;
  throw Error(ErrorKind::Accuracy, "Stieltjes inversion produced a negative density " + std::to_string(v));
}

void check_atoms_near(const Measure& mu, double x, double y0) {
  for (const auto& a : mu.atom_list()) {
    if (std::abs(a.position - x) <= y0) {
      throw Error(ErrorKind::Pole, "atom at " + std::to_string(a.position) + " within y0 of x");
    }
  }
}

}  // namespace

double stieltjes_density(const std::function<cplx(cplx)>& G, double x, double y0) {
  if (!(y0 > 0.0)) throw Error(ErrorKind::Domain, "y0 must be positive");
  const auto v = [&](double y) { return -G(cplx(x, y)).imag() / std::numbers::pi; };
  return clamp_density(2.0 * v(0.5 * y0) - v(y0));
}

double stieltjes_density(const Measure& mu, double x, double y0) {
  if (!(y0 > 0.0)) throw Error(ErrorKind::Domain, "y0 must be positive");
  check_atoms_near(mu, x, y0);
  if (mu.as<Atoms>() != nullptr) {
    return stieltjes_density([&mu](cplx z) { return cauchy(mu, z); }, x, y0);
  }
  return clamp_density(density(mu, x));
}

double cdf(const Measure& mu, double x) {
  double total = 0.0;
  for (const auto& a : mu.atom_list()) {
    if (a.position <= x) total += a.weight;
  }
  total += integrate_continuous(mu, [](double) { return 1.0; }, -std::numeric_limits<double>::infinity(), x);
  return std::clamp(total, 0.0, 1.0);
}

double cdf_left(const Measure& mu, double x) {
  double total = 0.0;
  for (const auto& a : mu.atom_list()) {
    if (a.position < x) total += a.weight;
  }
  total += integrate_continuous(mu, [](double) { return 1.0; }, -std::numeric_limits<double>::infinity(), x);
  return std::clamp(total, 0.0, 1.0);
}

bool EvalWindow::in_sector(cplx w, double th) const {
  if (!(std::abs(w) < sector_radius)) return false;
  const double arg = std::arg(w);
  return arg > -std::numbers::pi + th && arg < -th;
}

EvalWindow make_window(double delta) {
  if (!(delta > 0.0 && delta < 0.1)) throw Error(ErrorKind::Domain, "delta must lie in (0, 1/10)");
  const double d32 = delta * std::sqrt(delta);
  EvalWindow w{};
  w.delta = delta;
  w.K = {-2.0 + 2.0 * delta, 2.0 - 2.0 * delta, d32, true};
  w.K_delta = {-2.0 + delta, 2.0 - delta, 2.0 * d32, false};
  w.theta = std::asin(0.5 * std::sqrt(delta / 4.0 * (1.0 - delta / 4.0)));
  w.sector_radius = 1.4;
  return w;
}

bool check_window_mapping(const EvalWindow& window, int samples) {
  return check_window_mapping(window, samples, window.theta);
}

bool check_window_mapping(const EvalWindow& window, int samples, double theta) {
  if (samples < 4) throw Error(ErrorKind::Domain, "need at least 4 boundary samples");
  const Rect& r = window.K_delta;
  const double wx = r.x_hi - r.x_lo, wy = 2.0 * r.y_max;
  const double perimeter = 2.0 * (wx + wy);
  for (int i = 0; i < samples; ++i) {
    double s = perimeter * i / samples;
    cplx z;
    if (s < wx) {
      z = {r.x_lo + s, -r.y_max};
    } else if ((s -= wx) < wy) {
      z = {r.x_hi, -r.y_max + s};
    } else if ((s -= wy) < wx) {
      z = {r.x_hi - s, r.y_max};
    } else {
      s -= wx;
      z = {r.x_lo, r.y_max - s};
    }
    if (!window.in_sector(semicircle_cauchy(z), theta)) return false;
  }
  return true;
}

}  // namespace freeclt
