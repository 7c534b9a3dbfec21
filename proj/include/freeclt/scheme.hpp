#pragma once

#include <boost/rational.hpp>

#include <map>
#include <string>
#include <vector>

#include "freeclt/edgeworth.hpp"
#include "freeclt/measure.hpp"
#include "freeclt/transforms.hpp"

namespace freeclt {

using Rational = boost::rational<long long>;

/// Multiset of derivative orders, kept sorted in decreasing order.
using Monomial = std::vector<int>;

/// Polynomial in commuting derivative operators acting on distinct slots:
/// the monomial {3, 3} stands for d^3/d eps_1^3 d^3/d eps_2^3.
class OperatorPoly {
 public:
  OperatorPoly() = default;
  static OperatorPoly monomial(Monomial m, Rational c = 1);
  static OperatorPoly constant(Rational c);

  OperatorPoly& operator+=(const OperatorPoly& o);
  OperatorPoly operator+(const OperatorPoly& o) const;
  OperatorPoly operator*(const OperatorPoly& o) const;
  OperatorPoly operator*(Rational c) const;

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  Rational coefficient(const Monomial& m) const;
  bool operator==(const OperatorPoly& o) const { return terms_ == o.terms_; }

  std::string to_string() const;

 private:
  std::map<Monomial, Rational> terms_;  // zero coefficients are never stored
};

/// kappa_p(D) from the formal logarithm of 1 + sum_{q >= 2} eps^q D^q / q!.
OperatorPoly cumulant_operator(int p);

/// P_r as a polynomial in the cumulants: keys are multisets of cumulant indices.
using CumulantPoly = std::map<std::vector<int>, Rational>;
CumulantPoly edgeworth_polynomial(int r);

/// P_r(kappa.(D)).
OperatorPoly edgeworth_operator(int r);

/// D^alpha h_inf at eps = 0, where h_inf(eps; z) is the Cauchy transform of
/// omega boxplus D_{eps_1} mu boxplus ... at z. Solved order by order as a
/// truncated power series in eps.
cplx h_inf_derivative(const Monomial& alpha, const FreeCumulants& kappa, cplx z, const EvalWindow& window);
cplx h_inf_derivative(const Monomial& alpha, const Measure& mu, cplx z, const EvalWindow& window);

/// The same derivative by central differences of the subordination solver,
/// extrapolated with two Richardson levels. step <= 0 picks a default.
cplx h_inf_derivative_fd(const Monomial& alpha, const Measure& mu, cplx z, double step = 0.0);

/// Symbolic value after checking it against the finite-difference value
/// (relative tolerance 1e-4).
cplx h_inf_derivative_checked(const Monomial& alpha, const Measure& mu, cplx z, const EvalWindow& window);

/// Applies P_r(kappa.(D)) to h_inf for r = 0..order.
ExpansionSeries assemble_expansion(const FreeCumulants& kappa, int n, cplx z, int order, const EvalWindow& window);
ExpansionSeries assemble_expansion(const Measure& mu, int n, cplx z, int order, const EvalWindow& window);

struct ProbeResult {
  std::vector<int> n;
  std::vector<double> difference;  // sampled sup over eps of |h_{n+s} - h_inf|
  double slope;                    // NaN when the differences vanish
  double constant;                 // max difference * sqrt(n)
};

/// Decay of |h_{n+s}(n^{-1/2}, ..., eps_s; z) - h_inf(eps_s; z)| in n.
ProbeResult convergence_probe(const Measure& mu, int s, const std::vector<int>& n_list, cplx z);

struct SchemeDiagnostics {
  double d_s_r;  // sampled, not a bound
  double fd_step;
  int richardson_levels;
};

/// Sampled sup of |D^alpha h_{m+s}| over weight vectors with free slots in
/// [-n^{-1/2}, n^{-1/2}] and z on a grid in K.
SchemeDiagnostics empirical_derivative_sup(const Measure& mu, const Monomial& alpha, int n, int m,
                                           const EvalWindow& window, int samples = 8);

}  // namespace freeclt
