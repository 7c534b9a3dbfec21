#pragma once

#include <array>
#include <optional>

#include "freeclt/measure.hpp"
#include "freeclt/transforms.hpp"

namespace freeclt {

/// Chebyshev polynomial of the second kind by the three-term recurrence.
double chebyshev_u(int n, double x);

/// Coefficient functions of the n^{-k/2} terms of the Cauchy expansion,
/// evaluated at w = G_omega(z), k in {1, 2, 3}.
cplx coefficient_B(int k, cplx w, const FreeCumulants& kappa);

enum class ExpansionKind { Cauchy, Density, Distribution };

struct ExpansionSeries {
  ExpansionKind kind;
  std::array<cplx, 4> orders{};  // coefficients of n^0, n^{-1/2}, n^{-1}, n^{-3/2}
  cplx total;
  int n;
  int order;
  cplx at;  // z, x, or b for a distribution over (a, b)
  FreeCumulants kappa;
  bool clamped = false;

  double real_total() const { return total.real(); }
};

/// The n^{-r/2} expansion of G_{mu_n}(z) for z in the window K.
ExpansionSeries expand_cauchy(cplx z, const FreeCumulants& kappa, int n, int order, const EvalWindow& window);

/// Density expansion for x in [-2 + 2 delta, 2 - 2 delta]; a negative total is
/// clamped to 0 and flagged.
ExpansionSeries expand_density(double x, const FreeCumulants& kappa, int n, int order, const EvalWindow& window);

/// mu_n(a, b) for [a, b] inside [-2 + 2 delta, 2 - 2 delta].
ExpansionSeries expand_distribution(double a, double b, const FreeCumulants& kappa, int n, int order,
                                    const EvalWindow& window);

/// Semicircle density and distribution function.
double semicircle_density(double x);
double semicircle_cdf(double x);

/// Correction brackets of the density and distribution expansions at x (r = 1..3).
double density_term(int r, double x, const FreeCumulants& kappa);
double distribution_term(int r, double x, const FreeCumulants& kappa);

struct CGCoefficients {
  double a_n, b_n, d_n, E_n;
};

CGCoefficients cg_coefficients(const FreeCumulants& kappa, int n);

struct CGValue {
  double value;
  double remainder_bound;  // up to an absolute constant; NaN when not requested
};

/// Approximation of mu_n((-inf, x + a_n)).
CGValue cg_expand_distribution(double x, const FreeCumulants& kappa, int n);
/// Same, with the remainder envelope built from the tail functionals of mu
/// (finite absolute moment of order q >= 4).
CGValue cg_expand_distribution(double x, const Measure& mu, double q, int n);

/// Approximation of p_{mu_n}(x + a_n) with envelope 1 / (n^{3/2} sqrt(4 - (E_n x)^2)).
/// h defaults to n^{-3/2}.
CGValue cg_expand_density(double x, const FreeCumulants& kappa, int n, std::optional<double> h = std::nullopt);

}  // namespace freeclt
