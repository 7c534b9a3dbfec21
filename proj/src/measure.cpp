#include "freeclt/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "freeclt/quadrature.hpp"

namespace freeclt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMeasure: return "invalid measure";
    case ErrorKind::UnsupportedOrder: return "unsupported order";
    case ErrorKind::DegenerateDilation: return "degenerate dilation";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::Accuracy: return "accuracy";
    case ErrorKind::Division: return "division";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Normalization: return "normalization";
    case ErrorKind::Window: return "window";
    case ErrorKind::Singular: return "singular system";
    case ErrorKind::Parse: return "parse error";
  }
  return "error";
}

namespace {

constexpr double kMassTolerance = 1e-9;
constexpr double kRenormalizeLimit = 1e-6;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double checked_scale(double mass, const char* what) {
  if (!std::isfinite(mass) || std::abs(mass - 1.0) > kRenormalizeLimit) {
    throw Error(ErrorKind::InvalidMeasure,
                std::string(what) + " total mass " + std::to_string(mass) + " is not 1");
  }
  return std::abs(mass - 1.0) <= kMassTolerance ? 1.0 : 1.0 / mass;
}

double trapezoid_mass(const GridDensity& g) {
  const auto n = g.samples.size();
  return g.spacing() * (g.samples.sum() - 0.5 * (g.samples[0] + g.samples[n - 1]));
}

// Continuous part of a semicircle or free Poisson law written as
//   y(theta) = center - radius * cos(theta),  theta in [0, pi],
// with mass density weight(theta) d theta. radius < 0 for reflected laws.
struct Arc {
  double center;
  double radius;
  double rate;      // free Poisson rate, 0 for the semicircle
  double mass;      // mass carried by the continuous part

  double y(double theta) const { return center - radius * std::cos(theta); }

  double weight(double theta) const {
    const double s = std::sin(theta);
    if (rate == 0.0) return 2.0 / std::numbers::pi * s * s;
    // x(theta) = (1 - sqrt(l))^2 + 4 sqrt(l) sin^2(theta/2) in unit-jump coordinates
    const double rl = std::sqrt(rate);
    const double sh = std::sin(0.5 * theta);
    const double x = (1.0 - rl) * (1.0 - rl) + 4.0 * rl * sh * sh;
    if (x <= 0.0) {
      // rate == 1 at theta == 0: sin^2(theta)/x -> cos^2(theta/2)
      return 4.0 * rate / (2.0 * std::numbers::pi) * std::cos(0.5 * theta) * std::cos(0.5 * theta);
    }
    return 4.0 * rate * s * s / (2.0 * std::numbers::pi * x);
  }

  double theta_of(double yv) const {
    const double c = std::clamp((center - yv) / radius, -1.0, 1.0);
    return std::acos(c);
  }

  // Integral of f over { y : lo < y < hi } restricted to the arc.
  template <class F>
  double integrate(F&& f, double lo, double hi) const {
    double ta = 0.0, tb = std::numbers::pi;
    const double ylo = std::min(y(0.0), y(std::numbers::pi));
    const double yhi = std::max(y(0.0), y(std::numbers::pi));
    lo = std::max(lo, ylo);
    hi = std::min(hi, yhi);
    if (!(hi > lo)) return 0.0;
    if (radius > 0) {
      ta = theta_of(lo);
      tb = theta_of(hi);
    } else {
      ta = theta_of(hi);
      tb = theta_of(lo);
    }
    if (!(tb > ta)) return 0.0;
    const int panels = std::max(4, static_cast<int>(std::ceil(48.0 * (tb - ta) / std::numbers::pi)));
    return quad::integrate([&](double t) { return f(y(t)) * weight(t); }, ta, tb, panels);
  }
};

std::optional<Arc> arc_of(const Measure& mu) {
  if (const auto* s = mu.as<Semicircle>()) {
    return Arc{s->mean, 2.0 * std::sqrt(s->variance), 0.0, 1.0};
  }
  if (const auto* p = mu.as<FreePoisson>()) {
    const double c = 1.0 + p->rate;
    const double r = 2.0 * std::sqrt(p->rate);
    return Arc{p->scale * c + p->shift, p->scale * r, p->rate, std::min(1.0, p->rate)};
  }
  return std::nullopt;
}

// Integral of f * p over (lo, hi) with p the piecewise-linear interpolant.
template <class F>
double grid_integrate(const GridDensity& g, F&& f, double lo, double hi) {
  lo = std::max(lo, g.a);
  hi = std::min(hi, g.b);
  if (!(hi > lo)) return 0.0;
  const double h = g.spacing();
  const auto n = g.samples.size();
  const auto first = static_cast<Eigen::Index>(std::floor((lo - g.a) / h));
  const auto last = std::min<Eigen::Index>(n - 2, static_cast<Eigen::Index>(std::floor((hi - g.a) / h)));
  static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                   0.8611363115940526};
  static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                   0.3478548451374538};
  double total = 0.0;
  for (auto i = std::max<Eigen::Index>(0, first); i <= last; ++i) {
    const double x0 = g.node(i);
    const double ca = std::max(lo, x0);
    const double cb = std::min(hi, x0 + h);
    if (!(cb > ca)) continue;
    const double p0 = g.samples[i];
    const double slope = (g.samples[i + 1] - p0) / h;
    const double mid = 0.5 * (ca + cb), half = 0.5 * (cb - ca);
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double x = mid + half * gx[k];
      acc += gw[k] * f(x) * (p0 + slope * (x - x0));
    }
    total += half * acc;
  }
  return total;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Moments of the unit-jump free Poisson law: sum_j Narayana(k, j) rate^j.
double mp_moment(double rate, int k) {
  if (k == 0) return 1.0;
  double total = 0.0;
  for (int j = 1; j <= k; ++j) {
    total += binomial(k, j) * binomial(k, j - 1) / k * std::pow(rate, j);
  }
  return total;
}

double catalan(int p) { return binomial(2 * p, p) / (p + 1); }

void check_order(int order) {
  if (order < 0 || order > kMaxMomentOrder) {
    throw Error(ErrorKind::UnsupportedOrder, "moment order " + std::to_string(order) + " outside 0.." +
                                                 std::to_string(kMaxMomentOrder));
  }
}

}  // namespace

double GridDensity::value(double x) const {
  if (x < a || x > b) return 0.0;
  const double h = spacing();
  const auto n = samples.size();
  auto i = static_cast<Eigen::Index>(std::floor((x - a) / h));
  i = std::clamp<Eigen::Index>(i, 0, n - 2);
  const double t = (x - node(i)) / h;
  return std::max(0.0, (1.0 - t) * samples[i] + t * samples[i + 1]);
}

Measure Measure::atoms(std::vector<Atom> points) {
  if (points.empty()) throw Error(ErrorKind::InvalidMeasure, "atomic measure without atoms");
  std::sort(points.begin(), points.end(),
            [](const Atom& l, const Atom& r) { return l.position < r.position; });
  double mass = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.position) || !std::isfinite(p.weight) || !(p.weight > 0.0)) {
      throw Error(ErrorKind::InvalidMeasure, "atom weights must be positive and finite");
    }
    if (i > 0 && !(p.position > points[i - 1].position)) {
      throw Error(ErrorKind::InvalidMeasure, "atom positions must be distinct");
    }
    mass += p.weight;
  }
  const double scale = checked_scale(mass, "atomic");
  if (scale != 1.0) {
    for (auto& p : points) p.weight *= scale;
  }
  return Measure(Atoms{std::move(points)});
}

Measure Measure::point_mass(double position) { return atoms({{position, 1.0}}); }

Measure Measure::semicircle(double mean, double variance) {
  if (!std::isfinite(mean) || !std::isfinite(variance) || !(variance > 0.0)) {
    throw Error(ErrorKind::InvalidMeasure, "semicircle needs finite mean and positive variance");
  }
  return Measure(Semicircle{mean, variance});
}

Measure Measure::free_poisson(double rate, double shift, double scale) {
  if (!std::isfinite(rate) || !(rate > 0.0) || !std::isfinite(shift) || !std::isfinite(scale) ||
      scale == 0.0) {
    throw Error(ErrorKind::InvalidMeasure, "free Poisson needs positive rate and nonzero scale");
  }
  return Measure(FreePoisson{rate, shift, scale});
}

Measure Measure::grid(double a, double b, Eigen::ArrayXd samples) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) {
    throw Error(ErrorKind::InvalidMeasure, "grid support must be a bounded interval a < b");
  }
  if (samples.size() < 16) throw Error(ErrorKind::InvalidMeasure, "grid density needs >= 16 samples");
  if (!samples.isFinite().all() || (samples < 0.0).any()) {
    throw Error(ErrorKind::InvalidMeasure, "grid samples must be finite and non-negative");
  }
  GridDensity g{a, b, std::move(samples)};
  const double scale = checked_scale(trapezoid_mass(g), "grid");
  if (scale != 1.0) g.samples *= scale;
  return Measure(std::move(g));
}

Measure Measure::bernoulli() { return atoms({{-1.0, 0.5}, {1.0, 0.5}}); }

bool Measure::is_point_mass() const {
  const auto* a = as<Atoms>();
  return a != nullptr && a->points.size() == 1;
}

std::pair<double, double> Measure::support() const {
  return std::visit(
      overloaded{
          [](const Atoms& a) { return std::pair{a.points.front().position, a.points.back().position}; },
          [](const Semicircle& s) {
            const double r = 2.0 * std::sqrt(s.variance);
            return std::pair{s.mean - r, s.mean + r};
          },
          [](const FreePoisson& p) {
            const double rl = std::sqrt(p.rate);
            double lo = (1.0 - rl) * (1.0 - rl);
            const double hi = (1.0 + rl) * (1.0 + rl);
            if (p.rate < 1.0) lo = 0.0;
            const double y0 = p.scale * lo + p.shift, y1 = p.scale * hi + p.shift;
            return std::pair{std::min(y0, y1), std::max(y0, y1)};
          },
          [](const GridDensity& g) { return std::pair{g.a, g.b}; },
      },
      v_);
}

double Measure::support_radius() const {
  const auto [lo, hi] = support();
  return std::max(std::abs(lo), std::abs(hi));
}

double Measure::mean() const { return moment(*this, 1); }

double Measure::variance() const {
  const double m1 = moment(*this, 1);
  return moment(*this, 2) - m1 * m1;
}

std::vector<Atom> Measure::atom_list() const {
  if (const auto* a = as<Atoms>()) return a->points;
  if (const auto* p = as<FreePoisson>(); p != nullptr && p->rate < 1.0) {
    return {{p->shift, 1.0 - p->rate}};
  }
  return {};
}

double integrate_continuous(const Measure& mu, const std::function<double(double)>& f, double lo,
                            double hi) {
  if (const auto arc = arc_of(mu)) return arc->integrate(f, lo, hi);
  if (const auto* g = mu.as<GridDensity>()) return grid_integrate(*g, f, lo, hi);
  return 0.0;
}

double density(const Measure& mu, double x) {
  return std::visit(overloaded{
                        [](const Atoms&) { return 0.0; },
                        [x](const Semicircle& s) {
                          const double d = 4.0 * s.variance - (x - s.mean) * (x - s.mean);
                          return d > 0 ? std::sqrt(d) / (2.0 * std::numbers::pi * s.variance) : 0.0;
                        },
                        [x](const FreePoisson& p) {
                          const double u = (x - p.shift) / p.scale;
                          const double rl = std::sqrt(p.rate);
                          const double a = (1 - rl) * (1 - rl), b = (1 + rl) * (1 + rl);
                          if (!(u > a && u < b)) return 0.0;
                          return std::sqrt((u - a) * (b - u)) / (2.0 * std::numbers::pi * u) /
                                 std::abs(p.scale);
                        },
                        [x](const GridDensity& g) { return g.value(x); },
                    },
                    mu.variant());
}

double total_mass(const Measure& mu) {
  if (const auto* g = mu.as<GridDensity>()) return trapezoid_mass(*g);
  double mass = 0.0;
  for (const auto& a : mu.atom_list()) mass += a.weight;
  if (const auto arc = arc_of(mu)) mass += arc->integrate([](double) { return 1.0; }, -1e300, 1e300);
  return mass;
}

double moment(const Measure& mu, int order) {
  check_order(order);
  const int k = order;
  return std::visit(
      overloaded{
          [k](const Atoms& a) {
            double s = 0.0;
            for (const auto& p : a.points) s += p.weight * std::pow(p.position, k);
            return s;
          },
          [k](const Semicircle& s) {
            const double sigma = std::sqrt(s.variance);
            double total = 0.0;
            for (int j = 0; j <= k; j += 2) {
              total += binomial(k, j) * std::pow(s.mean, k - j) * std::pow(sigma, j) * catalan(j / 2);
            }
            return total;
          },
          [k](const FreePoisson& p) {
            double total = 0.0;
            for (int j = 0; j <= k; ++j) {
              total += binomial(k, j) * std::pow(p.shift, k - j) * std::pow(p.scale, j) * mp_moment(p.rate, j);
            }
            return total;
          },
          [k](const GridDensity& g) {
            const auto n = g.samples.size();
            double total = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
              const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
              total += w * g.samples[i] * std::pow(g.node(i), k);
            }
            return total * g.spacing();
          },
      },
      mu.variant());
}

double absolute_moment_real(const Measure& mu, double q) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw Error(ErrorKind::Domain, "absolute moment order must be >= 0");
  if (q > kMaxMomentOrder) throw Error(ErrorKind::UnsupportedOrder, "absolute moment order above 16");
  if (q == 0.0) return 1.0;
  double total = 0.0;
  for (const auto& a : mu.atom_list()) total += a.weight * std::pow(std::abs(a.position), q);
  const auto f = [q](double x) { return std::pow(std::abs(x), q); };
  if (const auto* g = mu.as<GridDensity>()) {
    const auto n = g->samples.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      acc += w * g->samples[i] * f(g->node(i));
    }
    return acc * g->spacing();
  }
  total += integrate_continuous(mu, f, -std::numeric_limits<double>::infinity(), 0.0);
  total += integrate_continuous(mu, f, 0.0, std::numeric_limits<double>::infinity());
  return total;
}

double absolute_moment(const Measure& mu, int order) {
  check_order(order);
  if (order % 2 == 0) return moment(mu, order);
  return absolute_moment_real(mu, static_cast<double>(order));
}

MomentVector moment_vector(const Measure& mu, int max_order) {
  check_order(max_order);
  MomentVector mv;
  for (int k = 0; k <= max_order; ++k) {
    mv.moments.push_back(moment(mu, k));
    mv.absolute.push_back(absolute_moment(mu, k));
  }
  return mv;
}

Measure dilate(const Measure& mu, double t) {
  if (t == 0.0 || !std::isfinite(t)) throw Error(ErrorKind::DegenerateDilation, "dilation factor must be nonzero");
  return std::visit(overloaded{
                        [t](const Atoms& a) {
                          std::vector<Atom> pts;
                          pts.reserve(a.points.size());
                          for (const auto& p : a.points) pts.push_back({t * p.position, p.weight});
                          return Measure::atoms(std::move(pts));
                        },
                        [t](const Semicircle& s) { return Measure::semicircle(t * s.mean, t * t * s.variance); },
                        [t](const FreePoisson& p) {
                          return Measure::free_poisson(p.rate, t * p.shift, t * p.scale);
                        },
                        [t](const GridDensity& g) {
                          Eigen::ArrayXd s = g.samples / std::abs(t);
                          if (t > 0) return Measure::grid(t * g.a, t * g.b, std::move(s));
                          Eigen::ArrayXd r = s.reverse();
                          return Measure::grid(t * g.b, t * g.a, std::move(r));
                        },
                    },
                    mu.variant());
}

Measure shift(const Measure& mu, double a) {
  return std::visit(overloaded{
                        [a](const Atoms& at) {
                          std::vector<Atom> pts = at.points;
                          for (auto& p : pts) p.position += a;
                          return Measure::atoms(std::move(pts));
                        },
                        [a](const Semicircle& s) { return Measure::semicircle(s.mean + a, s.variance); },
                        [a](const FreePoisson& p) { return Measure::free_poisson(p.rate, p.shift + a, p.scale); },
                        [a](const GridDensity& g) { return Measure::grid(g.a + a, g.b + a, g.samples); },
                    },
                    mu.variant());
}

Measure standardize(const Measure& mu) {
  const double var = mu.variance();
  if (!(var > 0.0)) throw Error(ErrorKind::Normalization, "cannot standardize a point mass");
  return dilate(shift(mu, -mu.mean()), 1.0 / std::sqrt(var));
}

double tail_moment(const Measure& mu, double q, double t) {
  if (!(q >= 0.0)) throw Error(ErrorKind::Domain, "tail moment order must be >= 0");
  if (!(t > 0.0)) throw Error(ErrorKind::Domain, "tail threshold must be positive");
  double total = 0.0;
  for (const auto& a : mu.atom_list()) {
    if (std::abs(a.position) > t) total += a.weight * std::pow(std::abs(a.position), q);
  }
  const auto f = [q](double x) { return std::pow(std::abs(x), q); };
  total += integrate_continuous(mu, f, t, std::numeric_limits<double>::infinity());
  total += integrate_continuous(mu, f, -std::numeric_limits<double>::infinity(), -t);
  return total;
}

double lyapunov_fraction(double beta_q, double q, int n) {
  if (!(q >= 2.0)) throw Error(ErrorKind::Domain, "Lyapunov fraction needs q >= 2");
  if (n < 1) throw Error(ErrorKind::Domain, "n must be positive");
  return beta_q / std::pow(static_cast<double>(n), (q - 2.0) / 2.0);
}

double lyapunov_fraction(const Measure& mu, double q, int n) {
  return lyapunov_fraction(absolute_moment_real(mu, q), q, n);
}

double q_index(double q, int s) {
  if (s < 1 || s > 3) throw Error(ErrorKind::Domain, "s must be 1, 2 or 3");
  return std::min(q, static_cast<double>(s + 2));
}

double eta_qs(const Measure& mu, double q, int s, int n) {
  if (s < 1 || s > 3) throw Error(ErrorKind::Domain, "s must be 1, 2 or 3");
  if (q < s + 1) throw Error(ErrorKind::Domain, "eta_qs needs q >= s + 1");
  if (n < 1) throw Error(ErrorKind::Domain, "n must be positive");
  const double qs = q_index(q, s);
  const double beta = absolute_moment_real(mu, qs);
  const double root_n = std::sqrt(static_cast<double>(n));
  const auto g = [&](double eps) {
    return std::pow(eps, s + 2 - qs) + tail_moment(mu, qs, eps * root_n) / beta * std::pow(eps, -qs);
  };

  const double lo = 1e-6, hi = 1.0 / std::sqrt(10.0);
  constexpr int kGrid = 1024;
  const double llo = std::log(lo), lhi = std::log(hi);
  double best = g(hi);
  int best_i = kGrid - 1;
  for (int i = 0; i < kGrid; ++i) {
    const double v = g(std::exp(llo + (lhi - llo) * i / (kGrid - 1)));
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  // golden-section refinement in log(eps) around the best grid point
  double a = llo + (lhi - llo) * std::max(0, best_i - 1) / (kGrid - 1);
  double b = llo + (lhi - llo) * std::min(kGrid - 1, best_i + 1) / (kGrid - 1);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = g(std::exp(c)), fd = g(std::exp(d));
  for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = g(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = g(std::exp(d));
    }
  }
  return std::min({best, fc, fd});
}

TailFunctionals tail_functionals(const Measure& mu, double q, int s, int n, double t) {
  TailFunctionals tf{};
  tf.q = q;
  tf.L_qn = lyapunov_fraction(mu, q, n);
  tf.rho_q_t = tail_moment(mu, q, t);
  tf.eta_qs = eta_qs(mu, q, s, n);
  tf.q1 = q_index(q, 1);
  tf.q2 = q_index(q, 2);
  tf.q3 = q_index(q, 3);
  return tf;
}

}  // namespace freeclt
