#pragma once

#include <array>
#include <optional>

#include "freeclt/measure.hpp"
#include "freeclt/transforms.hpp"

namespace freeclt {

using Vec2 = std::array<cplx, 2>;
using Mat2 = std::array<std::array<cplx, 2>, 2>;
/// Row j holds d^2 F_j / dt_1^2, d^2 F_j / dt_1 dt_2, d^2 F_j / dt_2 dt_1, d^2 F_j / dt_2^2.
using Second = std::array<std::array<cplx, 4>, 2>;

struct NKCertificate {
  double beta0 = 0.0;
  double eta0 = 0.0;
  double K0 = 0.0;
  double h0 = 0.0;
  std::optional<double> radius;
  bool pass = false;
  bool empirical = false;  // suprema were sampled
};

/// h0 = beta0 eta0 K0; passes when h0 <= 1/2.
NKCertificate certify(double beta0, double eta0, double K0);

/// Subordination function of omega_{1/2} boxplus omega_{1/2}, continued across the real axis.
cplx reference_subordination(cplx z);

/// F(t) = ((z - t1 - t2)^{-1} + G_nu1(t1), (z - t1 - t2)^{-1} + G_nu2(t2)).
Vec2 eval_F(const Vec2& t, cplx z, const Measure& nu1, const Measure& nu2);

struct NKSystemPoint {
  cplx z;
  Vec2 t0;
  Vec2 F_value;
  Vec2 S_values;  // G_nu_j(t0_j) - G_mu_j(t0_j)
  cplx det_Fprime;
};

NKSystemPoint system_point(const Vec2& t0, cplx z, const Measure& nu1, const Measure& nu2, const Measure& mu1,
                           const Measure& mu2);

/// F'(t0) when t0 solves the system for (mu1, mu2).
Mat2 eval_F_prime(const Vec2& t0, const Measure& nu1, const Measure& nu2, const Measure& mu1, const Measure& mu2);

/// [F'(t0)]^{-1} F(t0) written through S_1, S_2.
Vec2 eval_newton_step(const Vec2& t0, cplx z, const Measure& nu1, const Measure& nu2, const Measure& mu1,
                      const Measure& mu2);

/// F''(t0) with D_j = G''_nu_j(t0_j) - 2 G_mu_j(t0_j)^3.
Second eval_F_second(const Vec2& t0, cplx z, const Measure& nu1, const Measure& nu2, const Measure& mu1,
                     const Measure& mu2);
/// F''(t) at an arbitrary t.
Second eval_F_second_at(const Vec2& t, cplx z, const Measure& nu1, const Measure& nu2);

double operator_norm(const Mat2& a);  // largest singular value
double second_norm(const Second& s);  // max row sum
double vector_norm(const Vec2& v);
Mat2 inverse(const Mat2& a);

/// (G_omega^2 + G'_{omega_{1/2}}(Z_ref))^2 - G_omega^4.
cplx reference_det(cplx z);

/// Sampled constants over M = [-2 + delta, 2 - delta] x (0, delta sqrt(delta)),
/// with t0 = (Z_ref, Z_ref) and mu_1 = mu_2 = omega_{1/2}.
NKCertificate certify_subordination(const Measure& nu1, const Measure& nu2, double delta, int z_samples = 64);

}  // namespace freeclt
