#pragma once

#include <optional>
#include <vector>

#include "freeclt/measure.hpp"
#include "freeclt/transforms.hpp"

namespace freeclt {

struct SubordinationSolution {
  cplx z;
  cplx Z1;
  cplx Z2;
  cplx g_value;  // G of mu1 boxplus mu2 at z
  int iterations;
  double residual;
};

/// mu1 boxplus mu2 at z (Im z > 0) by subordination.
SubordinationSolution convolve_pair(const Measure& mu1, const Measure& mu2, cplx z);

/// `multiplicity` identical free copies of `measure`.
struct Block {
  Measure measure;
  int multiplicity = 1;
};

struct BlockSolution {
  cplx z;
  std::vector<cplx> omega;  // one subordination function per block
  cplx g_value;
  int iterations;
  double residual;
};

/// Cauchy transform of the free convolution of all blocks at z.
///
/// The upper half plane is handled by fixed-point iteration and a Newton
/// polish. Points close to or below the real axis are reached by Newton
/// continuation in Im z from Im z = 1, which requires closed-form blocks.
BlockSolution solve_blocks(const std::vector<Block>& blocks, cplx z,
                           const std::vector<cplx>* seed = nullptr);

/// G of mu_n = D_{1/sqrt n}(mu boxplus ... boxplus mu) at z.
cplx clt_cauchy(const Measure& mu, int n, cplx z);
BlockSolution clt_solve(const Measure& mu, int n, cplx z);

/// Density of mu_n at x by Stieltjes inversion of the solver output.
double clt_density(const Measure& mu, int n, double x);

struct CltMeasure {
  Measure base;
  int n;
  std::vector<double> xs;       // requested grid
  std::vector<double> density;  // density on xs
  GridDensity grid_density;     // same data as an interpolant
  double subordination_residual_sup = 0.0;
  double lo = 0.0, hi = 0.0;    // detected support edges
  double mass = 0.0;            // integral over [lo, hi]

  double cdf(double x) const;
  double pdf(double x) const;
  /// Grid measure over [lo, hi], renormalized to unit mass.
  Measure to_measure(int samples = 2049) const;

  // cumulative distribution tabulated on x = c - r cos(theta)
  std::vector<double> theta_cdf;
  std::vector<double> theta_pdf;
};

CltMeasure clt_measure(const Measure& mu, int n, double a, double b, int count);

struct GapGrid {
  std::vector<cplx> z;
  std::vector<cplx> gap;  // G_{mu_n}(z) - G_omega(z)
  double sup = 0.0;
};

/// l_n = G_{mu_n} - G_omega sampled on the window K (nx by ny points).
GapGrid continuation_gap(const Measure& mu, int n, const EvalWindow& window, int nx = 41, int ny = 6);

/// Density of the free convolution of the blocks on a uniform grid over the
/// sum of their support hulls, as a renormalized grid measure. The result is
/// assumed to have no atoms; grid blocks are not supported.
Measure block_measure(const std::vector<Block>& blocks, int samples = 2049);

/// G of nu boxplus D_{eps_1} mu boxplus ... boxplus D_{eps_s} mu at z.
cplx partial_convolution(const Measure& mu, const std::vector<double>& epsilons, const Measure& nu, cplx z);

}  // namespace freeclt
