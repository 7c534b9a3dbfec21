#include "freeclt/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "freeclt/freeconv.hpp"

namespace freeclt {

OperatorPoly OperatorPoly::monomial(Monomial m, Rational c) {
  std::sort(m.begin(), m.end(), std::greater<>());
  OperatorPoly p;
  if (c != Rational(0)) p.terms_[std::move(m)] = c;
  return p;
}

OperatorPoly OperatorPoly::constant(Rational c) { return monomial({}, c); }

OperatorPoly& OperatorPoly::operator+=(const OperatorPoly& o) {
  for (const auto& [m, c] : o.terms_) {
    auto& slot = terms_[m];
    slot += c;
    if (slot == Rational(0)) terms_.erase(m);
  }
  return *this;
}

OperatorPoly OperatorPoly::operator+(const OperatorPoly& o) const {
  OperatorPoly r = *this;
  r += o;
  return r;
}

OperatorPoly OperatorPoly::operator*(const OperatorPoly& o) const {
  OperatorPoly r;
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : o.terms_) {
      Monomial m = ma;
      m.insert(m.end(), mb.begin(), mb.end());
      r += monomial(std::move(m), ca * cb);
    }
  }
  return r;
}

OperatorPoly OperatorPoly::operator*(Rational c) const {
  OperatorPoly r;
  if (c == Rational(0)) return r;
  for (const auto& [m, v] : terms_) r.terms_[m] = v * c;
  return r;
}

Rational OperatorPoly::coefficient(const Monomial& m) const {
  Monomial key = m;
  std::sort(key.begin(), key.end(), std::greater<>());
  const auto it = terms_.find(key);
  return it == terms_.end() ? Rational(0) : it->second;
}

std::string OperatorPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  // highest single order first reads naturally: D^4 - 3 D^2 D^2
  std::vector<std::pair<Monomial, Rational>> ordered(terms_.begin(), terms_.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& l, const auto& r) {
    if (l.first.size() != r.first.size()) return l.first.size() < r.first.size();
    return l.first > r.first;
  });
  for (const auto& [m, c] : ordered) {
    const bool neg = c < Rational(0);
    Rational mag = neg ? -c : c;
    os << (first ? (neg ? "-" : "") : (neg ? " - " : " + "));
    const bool unit = mag == Rational(1) && !m.empty();
    if (!unit) {
      os << mag.numerator();
      if (mag.denominator() != 1) os << "/" << mag.denominator();
      if (!m.empty()) os << " ";
    }
    for (std::size_t i = 0; i < m.size(); ++i) os << (i ? " " : "") << "D^" << m[i];
    first = false;
  }
  return os.str();
}

namespace {

long long factorial(int k) {
  long long f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Calls visit(parts) for every composition of total into parts >= min_part.
void compositions(int total, int min_part, std::vector<int>& parts,
                  const std::function<void(const std::vector<int>&)>& visit) {
  if (total == 0) {
    if (!parts.empty()) visit(parts);
    return;
  }
  for (int p = min_part; p <= total; ++p) {
    parts.push_back(p);
    compositions(total - p, min_part, parts, visit);
    parts.pop_back();
  }
}

}  // namespace

OperatorPoly cumulant_operator(int p) {
  if (p < 2 || p > 9) throw Error(ErrorKind::UnsupportedOrder, "cumulant operators are available for p = 2..9");
  OperatorPoly result;
  std::vector<int> parts;
  compositions(p, 2, parts, [&](const std::vector<int>& q) {
    const int k = static_cast<int>(q.size());
    Rational c((k % 2 == 1) ? 1 : -1, k);
    for (int qi : q) c /= factorial(qi);
    result += OperatorPoly::monomial(q, c);
  });
  return result * Rational(factorial(p));
}

CumulantPoly edgeworth_polynomial(int r) {
  if (r < 0 || r > 3) throw Error(ErrorKind::UnsupportedOrder, "Edgeworth polynomials are available for r = 0..3");
  CumulantPoly out;
  if (r == 0) {
    out[{}] = 1;
    return out;
  }
  std::vector<int> parts;
  compositions(r, 1, parts, [&](const std::vector<int>& j) {
    const int m = static_cast<int>(j.size());
    Rational c(1, factorial(m));
    std::vector<int> key;
    for (int ji : j) {
      c /= factorial(ji + 2);
      key.push_back(ji + 2);
    }
    std::sort(key.begin(), key.end(), std::greater<>());
    out[key] += c;
  });
  return out;
}

OperatorPoly edgeworth_operator(int r) {
  OperatorPoly total;
  for (const auto& [key, c] : edgeworth_polynomial(r)) {
    OperatorPoly term = OperatorPoly::constant(c);
    for (int p : key) term = term * cumulant_operator(p);
    total += term;
  }
  return total;
}

namespace {

// Truncated power series in s variables, variable i of degree <= dims[i] - 1.
class Series {
 public:
  explicit Series(std::vector<int> dims) : dims_(std::move(dims)) {
    size_ = 1;
    for (int d : dims_) size_ *= static_cast<std::size_t>(d);
    c_.assign(size_, 0.0);
    index_.resize(size_);
    for (std::size_t f = 0; f < size_; ++f) {
      std::vector<int> idx(dims_.size());
      std::size_t rem = f;
      for (std::size_t i = dims_.size(); i-- > 0;) {
        idx[i] = static_cast<int>(rem % static_cast<std::size_t>(dims_[i]));
        rem /= static_cast<std::size_t>(dims_[i]);
      }
      index_[f] = std::move(idx);
    }
  }

  static Series constant(const std::vector<int>& dims, cplx v) {
    Series s(dims);
    s.c_[0] = v;
    return s;
  }

  std::size_t flat(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) f = f * static_cast<std::size_t>(dims_[i]) + idx[i];
    return f;
  }

  cplx& operator[](std::size_t f) { return c_[f]; }
  cplx operator[](std::size_t f) const { return c_[f]; }
  std::size_t size() const { return size_; }
  const std::vector<int>& dims() const { return dims_; }

  Series operator+(const Series& o) const {
    Series r = *this;
    for (std::size_t f = 0; f < size_; ++f) r.c_[f] += o.c_[f];
    return r;
  }
  Series operator-(const Series& o) const {
    Series r = *this;
    for (std::size_t f = 0; f < size_; ++f) r.c_[f] -= o.c_[f];
    return r;
  }
  Series operator*(cplx v) const {
    Series r = *this;
    for (auto& x : r.c_) x *= v;
    return r;
  }

  Series operator*(const Series& o) const {
    Series r(dims_);
    std::vector<int> sum(dims_.size());
    for (std::size_t a = 0; a < size_; ++a) {
      if (c_[a] == 0.0) continue;
      for (std::size_t b = 0; b < size_; ++b) {
        if (o.c_[b] == 0.0) continue;
        bool inside = true;
        for (std::size_t i = 0; i < dims_.size() && inside; ++i) {
          sum[i] = index_[a][i] + index_[b][i];
          inside = sum[i] < dims_[i];
        }
        if (inside) r.c_[flat(sum)] += c_[a] * o.c_[b];
      }
    }
    return r;
  }

  Series inverse() const {
    if (c_[0] == 0.0) throw Error(ErrorKind::Division, "series with zero constant term is not invertible");
    Series b = constant(dims_, 1.0 / c_[0]);
    const Series two = constant(dims_, 2.0);
    for (int it = 0; it < 6; ++it) b = b * (two - *this * b);
    return b;
  }

  // eps_i^l as a series (zero when l exceeds the truncation)
  static Series eps_power(const std::vector<int>& dims, std::size_t var, int l) {
    Series s(dims);
    if (l < dims[var]) {
      std::vector<int> idx(dims.size(), 0);
      idx[var] = l;
      s.c_[s.flat(idx)] = 1.0;
    }
    return s;
  }

 private:
  std::vector<int> dims_;
  std::size_t size_;
  std::vector<cplx> c_;
  std::vector<std::vector<int>> index_;
};

void check_scheme_point(cplx z, const EvalWindow& window, cplx G) {
  const bool in_strip = z.real() >= window.K.x_lo && z.real() <= window.K.x_hi;
  if (!(window.K.contains(z) || (in_strip && z.imag() > 0.0))) {
    throw Error(ErrorKind::Window, "z outside the window K");
  }
  if (std::abs(1.0 - G * G) < window.delta / 16.0) {
    throw Error(ErrorKind::Window, "|1 - G_omega(z)^2| below delta / 16");
  }
}

}  // namespace

cplx h_inf_derivative(const Monomial& alpha, const FreeCumulants& kappa, cplx z, const EvalWindow& window) {
  const cplx G = semicircle_cauchy(z);
  check_scheme_point(z, window, G);
  int total = 0;
  for (int a : alpha) {
    if (a < 0) throw Error(ErrorKind::Domain, "derivative orders must be non-negative");
    total += a;
  }
  if (total > kMaxCumulantOrder) throw Error(ErrorKind::UnsupportedOrder, "total derivative order above 9");
  for (int a : alpha) {
    if (a > kappa.order() && a > 2) {
      throw Error(ErrorKind::UnsupportedOrder, "cumulants through order " + std::to_string(a) + " are required");
    }
  }
  if (alpha.empty() || total == 0) return G;

  std::vector<int> dims;
  for (int a : alpha) dims.push_back(a + 1);
  // F(h) = sum_i sum_l kappa_l eps_i^l h^{l-1} + h + 1/h - z
  Series h = Series::constant(dims, G);
  const Series zc = Series::constant(dims, z);
  const Series one = Series::constant(dims, 1.0);
  for (int it = 0; it < 8; ++it) {
    const Series hinv = h.inverse();
    Series F = h + hinv - zc;
    Series dF = one - hinv * hinv;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      Series hp = one;  // h^{l-1}
      Series hp_prev = Series(dims);  // h^{l-2}
      for (int l = 1; l <= alpha[i]; ++l) {
        const double k = kappa(l);
        const Series e = Series::eps_power(dims, i, l);
        if (k != 0.0) {
          F = F + e * hp * cplx(k);
          if (l >= 2) dF = dF + e * hp_prev * cplx(k * (l - 1));
        }
        hp_prev = hp;
        hp = hp * h;
      }
    }
    h = h - F * dF.inverse();
  }
  std::vector<int> top(alpha.begin(), alpha.end());
  double fact = 1.0;
  for (int a : alpha) fact *= static_cast<double>(factorial(a));
  return h[h.flat(top)] * fact;
}

cplx h_inf_derivative(const Monomial& alpha, const Measure& mu, cplx z, const EvalWindow& window) {
  int need = 2;
  for (int a : alpha) need = std::max(need, a);
  return h_inf_derivative(alpha, free_cumulants(mu, std::min(need, kMaxCumulantOrder)), z, window);
}

namespace {

// Tensor-product central differences of f around base, extrapolated twice.
cplx fd_derivative(const Monomial& alpha, const std::function<cplx(const std::vector<double>&)>& f,
                   const std::vector<double>& base, double step) {
  const auto level = [&](double h) {
    std::vector<int> j(alpha.size(), 0);
    cplx acc = 0.0;
    while (true) {
      std::vector<double> eps = base;
      double coef = 1.0;
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        const int k = alpha[i];
        eps[i] += (0.5 * k - j[i]) * h;
        double binom = 1.0;
        for (int t = 1; t <= j[i]; ++t) binom = binom * (k - j[i] + t) / t;
        coef *= ((j[i] % 2) ? -binom : binom) / std::pow(h, k);
      }
      acc += coef * f(eps);
      std::size_t i = 0;
      for (; i < alpha.size(); ++i) {
        if (++j[i] <= alpha[i]) break;
        j[i] = 0;
      }
      if (i == alpha.size()) break;
    }
    return acc;
  };
  const cplx d0 = level(step), d1 = level(0.5 * step), d2 = level(0.25 * step);
  const cplx r0 = (4.0 * d1 - d0) / 3.0, r1 = (4.0 * d2 - d1) / 3.0;
  return (16.0 * r1 - r0) / 15.0;
}

int total_order(const Monomial& alpha) { return std::accumulate(alpha.begin(), alpha.end(), 0); }

}  // namespace

cplx h_inf_derivative_fd(const Monomial& alpha, const Measure& mu, cplx z, double step) {
  const Measure omega = Measure::semicircle();
  // a single high-order slot is rounding-limited earlier than several order-3 slots
  if (step <= 0.0) step = total_order(alpha) <= 3 ? 1e-2 : (alpha.front() >= 4 ? 0.05 : 0.1);
  const auto f = [&](const std::vector<double>& eps) { return partial_convolution(mu, eps, omega, z); };
  return fd_derivative(alpha, f, std::vector<double>(alpha.size(), 0.0), step);
}

cplx h_inf_derivative_checked(const Monomial& alpha, const Measure& mu, cplx z, const EvalWindow& window) {
  const cplx sym = h_inf_derivative(alpha, mu, z, window);
  const cplx fd = h_inf_derivative_fd(alpha, mu, z);
  const double scale = std::max(1.0, std::abs(sym));
  if (std::abs(sym - fd) > 1e-4 * scale) {
    throw Error(ErrorKind::Accuracy, "symbolic and finite-difference derivatives disagree by " +
                                         std::to_string(std::abs(sym - fd)));
  }
  return sym;
}

ExpansionSeries assemble_expansion(const FreeCumulants& kappa, int n, cplx z, int order, const EvalWindow& window) {
  if (n < 1) throw Error(ErrorKind::Domain, "n must be positive");
  if (order < 0 || order > 3) throw Error(ErrorKind::UnsupportedOrder, "expansion order must be 0..3");
  if (!window.K.contains(z)) throw Error(ErrorKind::Window, "z outside the window K");
  ExpansionSeries s{ExpansionKind::Cauchy, {}, 0.0, n, order, z, kappa, false};
  std::map<Monomial, cplx> cache;
  const auto D = [&](const Monomial& m) {
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    const cplx v = h_inf_derivative(m, kappa, z, window);
    cache.emplace(m, v);
    return v;
  };
  const double rn = std::sqrt(static_cast<double>(n));
  double scale = 1.0;
  cplx total = 0.0;
  for (int r = 0; r <= order; ++r) {
    cplx acc = 0.0;
    const OperatorPoly op = edgeworth_operator(r);
    for (const auto& [m, c] : op.terms()) acc += boost::rational_cast<double>(c) * D(m);
    s.orders[r] = acc;
    total += acc * scale;
    scale /= rn;
  }
  s.total = total;
  return s;
}

ExpansionSeries assemble_expansion(const Measure& mu, int n, cplx z, int order, const EvalWindow& window) {
  return assemble_expansion(free_cumulants(mu, 9), n, z, order, window);
}

namespace {

// G of (m copies of D_{m^{-1/2}} mu) boxplus D_{eps_1} mu boxplus ... at z.
cplx weighted_sum_cauchy(const Measure& mu, int m, const std::vector<double>& eps, cplx z) {
  std::vector<Block> blocks;
  if (m > 0) blocks.push_back({dilate(mu, 1.0 / std::sqrt(static_cast<double>(m))), m});
  std::map<double, int> counts;
  for (double e : eps) {
    if (e != 0.0) ++counts[e];
  }
  for (const auto& [e, k] : counts) blocks.push_back({dilate(mu, e), k});
  if (blocks.empty()) return 1.0 / z;
  return solve_blocks(blocks, z).g_value;
}

double fit_slope(const std::vector<int>& n, const std::vector<double>& d) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(d[i] > 1e-14)) return std::numeric_limits<double>::quiet_NaN();
    const double x = std::log(static_cast<double>(n[i])), y = std::log(d[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = k * sxx - sx * sx;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (k * sxy - sx * sy) / den;
}

}  // namespace

ProbeResult convergence_probe(const Measure& mu, int s, const std::vector<int>& n_list, cplx z) {
  if (s < 0) throw Error(ErrorKind::Domain, "s must be non-negative");
  if (n_list.size() < 2) throw Error(ErrorKind::Domain, "need at least two values of n");
  const double m = mu.mean(), v = mu.variance();
  if (std::abs(m) > 1e-8 || std::abs(v - 1.0) > 1e-8) {
    throw Error(ErrorKind::Normalization, "probe needs a standardized measure");
  }
  static constexpr double kPattern[4] = {1.0, -0.5, 0.75, -1.0};
  const Measure omega = Measure::semicircle();
  ProbeResult out;
  out.n = n_list;
  out.constant = 0.0;
  for (int n : n_list) {
    if (n < 1) throw Error(ErrorKind::Domain, "n must be positive");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    double worst = 0.0;
    const int samples = s == 0 ? 1 : 4;
    for (int k = 0; k < samples; ++k) {
      std::vector<double> eps(static_cast<std::size_t>(s));
      for (int i = 0; i < s; ++i) eps[i] = scale * kPattern[(k + i) % 4];
      const cplx finite = weighted_sum_cauchy(mu, n, eps, z);
      const cplx limit = partial_convolution(mu, eps, omega, z);
      worst = std::max(worst, std::abs(finite - limit));
    }
    out.difference.push_back(worst);
    out.constant = std::max(out.constant, worst * std::sqrt(static_cast<double>(n)));
  }
  out.slope = fit_slope(out.n, out.difference);
  return out;
}

SchemeDiagnostics empirical_derivative_sup(const Measure& mu, const Monomial& alpha, int n, int m,
                                           const EvalWindow& window, int samples) {
  if (n < 1 || m < n) throw Error(ErrorKind::Domain, "need m >= n >= 1");
  if (samples < 1) throw Error(ErrorKind::Domain, "need at least one sample");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double step = 1e-2 * scale;
  static constexpr double kPattern[4] = {0.5, -1.0, 0.25, 1.0};
  double sup = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double x = window.K.x_lo + (window.K.x_hi - window.K.x_lo) * (k + 0.5) / samples;
    const cplx z(x, 0.5 * window.K.y_max);
    std::vector<double> base(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) base[i] = 0.5 * scale * kPattern[(k + i) % 4];
    const auto f = [&](const std::vector<double>& eps) { return weighted_sum_cauchy(mu, m, eps, z); };
    sup = std::max(sup, std::abs(fd_derivative(alpha, f, base, step)));
  }
  return {sup, step, 2};
}

}  // namespace freeclt
