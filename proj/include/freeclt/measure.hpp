#pragma once

#include <Eigen/Core>

#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "freeclt/errors.hpp"

namespace freeclt {

struct Atom {
  double position;
  double weight;
};

struct Atoms {
  std::vector<Atom> points;  // strictly increasing positions
};

struct Semicircle {
  double mean;
  double variance;
};

// Law of `scale * X + shift` where X is free Poisson (Marchenko-Pastur) with
// the given rate and unit jump size. Dilations act on `scale`, translations on
// `shift`, so the family is closed under affine maps.
struct FreePoisson {
  double rate;
  double shift;
  double scale = 1.0;
};

// Uniformly sampled density on [a, b]; samples[0] sits at a and samples.back()
// at b. Between samples the density is the linear interpolant.
struct GridDensity {
  double a;
  double b;
  Eigen::ArrayXd samples;

  double spacing() const { return (b - a) / static_cast<double>(samples.size() - 1); }
  double node(Eigen::Index i) const { return a + spacing() * static_cast<double>(i); }
  double value(double x) const;
};

/// A compactly supported probability measure.
///
/// Every constructor validates the invariants (positive weights, increasing
/// atoms, non-negative samples, total mass 1). Mass drift below 1e-6 is
/// renormalized silently; anything larger is rejected.
class Measure {
 public:
  using Variant = std::variant<Atoms, Semicircle, FreePoisson, GridDensity>;

  static Measure atoms(std::vector<Atom> points);
  static Measure point_mass(double position);
  static Measure semicircle(double mean = 0.0, double variance = 1.0);
  static Measure free_poisson(double rate, double shift, double scale = 1.0);
  static Measure grid(double a, double b, Eigen::ArrayXd samples);

  /// Symmetric Bernoulli law 0.5 (delta_{-1} + delta_{+1}).
  static Measure bernoulli();

  const Variant& variant() const { return v_; }

  template <class T>
  const T* as() const { return std::get_if<T>(&v_); }

  bool is_point_mass() const;

  /// Closed support hull [lo, hi].
  std::pair<double, double> support() const;
  double support_radius() const;

  double mean() const;
  double variance() const;

  /// Atom positions and weights (free Poisson with rate < 1 has one).
  std::vector<Atom> atom_list() const;

 private:
  explicit Measure(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

struct MomentVector {
  std::vector<double> moments;    // m_0 .. m_K
  std::vector<double> absolute;   // beta_0 .. beta_K

  int order() const { return static_cast<int>(moments.size()) - 1; }
};

struct TailFunctionals {
  double q;
  double L_qn;
  double rho_q_t;
  double eta_qs;
  double q1, q2, q3;
};

constexpr int kMaxMomentOrder = 16;

double moment(const Measure& mu, int order);
double absolute_moment(const Measure& mu, int order);
/// Absolute moment of real order q >= 0.
double absolute_moment_real(const Measure& mu, double q);
MomentVector moment_vector(const Measure& mu, int max_order);

Measure dilate(const Measure& mu, double t);
Measure shift(const Measure& mu, double a);

/// Affine standardization to zero mean and unit variance.
Measure standardize(const Measure& mu);

/// rho_q(mu, t) = integral of |x|^q over |x| > t.
double tail_moment(const Measure& mu, double q, double t);

double lyapunov_fraction(double beta_q, double q, int n);
double lyapunov_fraction(const Measure& mu, double q, int n);

/// q_s = min(q, s + 2) for s in {1, 2, 3}.
double q_index(double q, int s);

/// eta_qs(n) = inf over 0 < eps <= 10^{-1/2} of
///   eps^{s+2-q_s} + rho_{q_s}(mu, eps sqrt(n)) / beta_{q_s} * eps^{-q_s}.
double eta_qs(const Measure& mu, double q, int s, int n);

TailFunctionals tail_functionals(const Measure& mu, double q, int s, int n, double t);

/// Integral of f over the absolutely continuous part restricted to (lo, hi).
double integrate_continuous(const Measure& mu, const std::function<double(double)>& f,
                            double lo, double hi);

/// Density of the absolutely continuous part at x (0 for atoms).
double density(const Measure& mu, double x);

/// Total mass as recomputed from the representation.
double total_mass(const Measure& mu);

}  // namespace freeclt
