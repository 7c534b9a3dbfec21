#include "freeclt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "freeclt/measure.hpp"
#include "freeclt/parallel.hpp"

namespace freeclt {

DistributionView::DistributionView(const Measure& mu, int table) : atoms_(mu.atom_list()) {
  if (table < 2) throw Error(ErrorKind::Domain, "distribution table needs at least two nodes");
  std::tie(lo_, hi_) = mu.support();
  if (mu.as<Atoms>() != nullptr || !(hi_ > lo_)) return;
  const std::size_t N = static_cast<std::size_t>(table);
  c_.assign(N, 0.0);
  p_.assign(N, 0.0);
  std::vector<double> piece(N, 0.0);
  const double h = (hi_ - lo_) / (table - 1);
  parallel_for(N, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double x = lo_ + h * static_cast<double>(i);
      p_[i] = density(mu, x);
      if (i > 0) piece[i] = integrate_continuous(mu, [](double) { return 1.0; }, x - h, x);
    }
  });
  for (std::size_t i = 1; i < N; ++i) c_[i] = c_[i - 1] + piece[i];
  max_density_ = *std::max_element(p_.begin(), p_.end());
}

DistributionView::DistributionView(const CltMeasure& mu) {
  lo_ = mu.lo;
  hi_ = mu.hi;
  const std::size_t N = mu.theta_cdf.size() * 4;
  c_.resize(N);
  p_.resize(N);
  const double h = (hi_ - lo_) / static_cast<double>(N - 1);
  const double mass = mu.mass > 0.0 ? mu.mass : 1.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double x = lo_ + h * static_cast<double>(i);
    c_[i] = mu.cdf(x) / mass;
    p_[i] = mu.pdf(x) / mass;
  }
  c_.front() = 0.0;
  c_.back() = 1.0;
  max_density_ = *std::max_element(p_.begin(), p_.end());
}

double DistributionView::continuous(double x) const {
  if (c_.empty() || x <= lo_) return 0.0;
  if (x >= hi_) return c_.back();
  const int N = static_cast<int>(c_.size());
  const double h = (hi_ - lo_) / (N - 1);
  const int j = std::clamp(static_cast<int>((x - lo_) / h), 0, N - 2);
  const double t = (x - lo_) / h - j;
  const double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
  const double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
  const double v = h00 * c_[j] + h10 * h * p_[j] + h01 * c_[j + 1] + h11 * h * p_[j + 1];
  return std::clamp(v, std::min(c_[j], c_[j + 1]), std::max(c_[j], c_[j + 1]));
}

double DistributionView::cdf(double x) const {
  double v = continuous(x);
  for (const auto& a : atoms_) {
    if (a.position <= x) v += a.weight;
  }
  return std::clamp(v, 0.0, 1.0);
}

double DistributionView::cdf_left(double x) const {
  double v = continuous(x);
  for (const auto& a : atoms_) {
    if (a.position < x) v += a.weight;
  }
  return std::clamp(v, 0.0, 1.0);
}

namespace {

void check_resolution(int resolution) {
  if (resolution < 2) throw Error(ErrorKind::Domain, "resolution must be at least 2");
}

std::vector<double> merged_points(const DistributionView& a, const DistributionView& b, int resolution) {
  const double lo = std::min(a.lo(), b.lo()), hi = std::max(a.hi(), b.hi());
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(resolution) + a.atoms().size() + b.atoms().size());
  for (int i = 0; i < resolution; ++i) xs.push_back(lo + (hi - lo) * i / (resolution - 1));
  for (const auto& at : a.atoms()) xs.push_back(at.position);
  for (const auto& at : b.atoms()) xs.push_back(at.position);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

// Fb lies between Fa shifted by s in both directions, up to s.
bool sandwiched(const DistributionView& a, const DistributionView& b, const std::vector<double>& xs, double s) {
  constexpr double slack = 1e-12;
  const auto check = [&](double x) {
    if (a.cdf(x - s) - s > b.cdf(x) + slack) return false;
    if (b.cdf(x) > a.cdf(x + s) + s + slack) return false;
    if (a.cdf_left(x - s) - s > b.cdf_left(x) + slack) return false;
    if (b.cdf_left(x) > a.cdf_left(x + s) + s + slack) return false;
    return true;
  };
  for (double x : xs) {
    if (!check(x)) return false;
  }
  for (const auto* v : {&a, &b}) {
    for (const auto& at : v->atoms()) {
      if (!check(at.position - s) || !check(at.position + s)) return false;
    }
  }
  return true;
}

}  // namespace

double kolmogorov(const DistributionView& a, const DistributionView& b, int resolution) {
  check_resolution(resolution);
  double sup = 0.0;
  for (double x : merged_points(a, b, resolution)) {
    sup = std::max(sup, std::abs(a.cdf(x) - b.cdf(x)));
    sup = std::max(sup, std::abs(a.cdf_left(x) - b.cdf_left(x)));
  }
  return std::min(sup, 1.0);
}

double kolmogorov(const Measure& a, const Measure& b, int resolution) {
  return kolmogorov(DistributionView(a), DistributionView(b), resolution);
}

double levy(const DistributionView& a, const DistributionView& b, int resolution) {
  check_resolution(resolution);
  const auto xs = merged_points(a, b, resolution);
  const auto ok = [&](double s) { return sandwiched(a, b, xs, s) && sandwiched(b, a, xs, s); };
  if (ok(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 20; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

double levy(const Measure& a, const Measure& b, int resolution) {
  return levy(DistributionView(a), DistributionView(b), resolution);
}

DistanceReport distances(const DistributionView& a, const DistributionView& b, int resolution) {
  check_resolution(resolution);
  const double span = std::max(a.hi(), b.hi()) - std::min(a.lo(), b.lo());
  const double spacing = span / (resolution - 1);
  return {kolmogorov(a, b, resolution), levy(a, b, resolution), resolution,
          std::max(a.max_density(), b.max_density()) * spacing};
}

DistanceReport distances(const Measure& a, const Measure& b, int resolution) {
  return distances(DistributionView(a), DistributionView(b), resolution);
}

BerryEsseenFit berry_esseen_slope(const Measure& mu, const std::vector<int>& n_list, int resolution) {
  if (n_list.empty()) throw Error(ErrorKind::Domain, "n_list is empty");
  BerryEsseenFit fit;
  fit.n = n_list;
  fit.beta3 = absolute_moment(mu, 3);
  const DistributionView omega(Measure::semicircle());
  for (int n : n_list) {
    if (n < 1) throw Error(ErrorKind::Domain, "n must be positive");
    const auto mn = clt_measure(mu, n, -2.0, 2.0, 2);
    fit.d_K.push_back(kolmogorov(omega, DistributionView(mn), resolution));
  }
  fit.c_fit = 0.0;
  for (std::size_t i = 0; i < fit.n.size(); ++i) {
    fit.c_fit = std::max(fit.c_fit, fit.d_K[i] * std::sqrt(static_cast<double>(fit.n[i])) / fit.beta3);
  }
  fit.slope_defined = fit.n.size() >= 2 &&
                      std::all_of(fit.d_K.begin(), fit.d_K.end(), [](double d) { return d > 1e-6; });
  fit.slope = std::numeric_limits<double>::quiet_NaN();
  if (fit.slope_defined) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(fit.n.size());
    for (std::size_t i = 0; i < fit.n.size(); ++i) {
      const double x = std::log(static_cast<double>(fit.n[i])), y = std::log(fit.d_K[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    fit.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  }
  return fit;
}

}  // namespace freeclt
