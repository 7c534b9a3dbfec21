#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "freeclt/measure.hpp"

namespace freeclt {

using cplx = std::complex<double>;

/// Cauchy transform G(z) = integral of mu(dx) / (z - x).
///
/// Semicircle and free Poisson laws are evaluated in closed form and continue
/// analytically across the interior of their support into the lower half
/// plane; elsewhere the integral itself is returned.
cplx cauchy(const Measure& mu, cplx z);

struct CauchyJet {
  cplx g, d1, d2;
};

/// G together with its first two derivatives.
CauchyJet cauchy_jet(const Measure& mu, cplx z);

/// d^k G / dz^k for k in {0, 1, 2}.
cplx cauchy_derivative(const Measure& mu, cplx z, int order);

/// F = 1 / G.
cplx reciprocal_transform(const Measure& mu, cplx z);

/// Standard semicircle G_omega with the continuation across (-2, 2).
cplx semicircle_cauchy(cplx z, double mean = 0.0, double variance = 1.0);

struct FreeCumulants {
  std::vector<double> kappa;  // kappa[l - 1] holds the l-th free cumulant
  double support_radius = 0.0;

  int order() const { return static_cast<int>(kappa.size()); }
  /// l-th cumulant, 0 beyond the stored order.
  double operator()(int l) const {
    return l >= 1 && l <= order() ? kappa[static_cast<std::size_t>(l - 1)] : 0.0;
  }
};

constexpr int kMaxCumulantOrder = 9;

FreeCumulants cumulants_from_moments(const MomentVector& moments, int K);
MomentVector moments_from_cumulants(const FreeCumulants& kappa, int K);

/// (kappa_1, ..., kappa_K) of mu.
std::vector<double> r_series(const Measure& mu, int K);
FreeCumulants free_cumulants(const Measure& mu, int K);

/// 2L/(l-1) * (4L)^(l-1): a priori bound on |kappa_l| for support radius L.
double cumulant_bound(double L, int l);

/// -Im G(x + i0) / pi.
double stieltjes_density(const Measure& mu, double x, double y0 = 1e-3);
double stieltjes_density(const std::function<cplx(cplx)>& G, double x, double y0 = 1e-3);

/// mu((-inf, x]) and mu((-inf, x)).
double cdf(const Measure& mu, double x);
double cdf_left(const Measure& mu, double x);

struct Rect {
  double x_lo, x_hi, y_max;
  bool strict_y;

  bool contains(cplx z) const {
    const bool y_ok = strict_y ? std::abs(z.imag()) < y_max : std::abs(z.imag()) <= y_max;
    return z.real() >= x_lo && z.real() <= x_hi && y_ok;
  }
};

struct EvalWindow {
  double delta;
  Rect K;
  Rect K_delta;
  double theta;
  double sector_radius = 1.4;

  bool in_sector(cplx w) const { return in_sector(w, theta); }
  bool in_sector(cplx w, double th) const;
};

EvalWindow make_window(double delta);

/// Samples the boundary of K_delta and checks that G_omega maps it into the
/// sector {arg w in (-pi + theta, -theta), |w| < 1.4}.
bool check_window_mapping(const EvalWindow& window, int samples);
bool check_window_mapping(const EvalWindow& window, int samples, double theta);

}  // namespace freeclt
