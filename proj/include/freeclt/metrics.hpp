#pragma once

#include <vector>

#include "freeclt/freeconv.hpp"
#include "freeclt/measure.hpp"

namespace freeclt {

/// Distribution function of a measure with its atoms kept exact. The
/// continuous part is tabulated once and interpolated with cubic Hermite
/// polynomials.
class DistributionView {
 public:
  explicit DistributionView(const Measure& mu, int table = 8193);
  explicit DistributionView(const CltMeasure& mu);

  double cdf(double x) const;       // mu((-inf, x])
  double cdf_left(double x) const;  // mu((-inf, x))
  const std::vector<Atom>& atoms() const { return atoms_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double max_density() const { return max_density_; }

 private:
  double continuous(double x) const;

  std::vector<Atom> atoms_;
  double lo_ = 0.0, hi_ = 0.0;
  double max_density_ = 0.0;
  std::vector<double> c_;  // continuous mass below each node
  std::vector<double> p_;  // continuous density at each node
};

constexpr int kDefaultResolution = 4096;

double kolmogorov(const DistributionView& a, const DistributionView& b, int resolution = kDefaultResolution);
double kolmogorov(const Measure& a, const Measure& b, int resolution = kDefaultResolution);

double levy(const DistributionView& a, const DistributionView& b, int resolution = kDefaultResolution);
double levy(const Measure& a, const Measure& b, int resolution = kDefaultResolution);

struct DistanceReport {
  double d_K;
  double d_L;
  int grid_resolution;
  double error_estimate;  // max density times grid spacing
};

DistanceReport distances(const DistributionView& a, const DistributionView& b, int resolution = kDefaultResolution);
DistanceReport distances(const Measure& a, const Measure& b, int resolution = kDefaultResolution);

struct BerryEsseenFit {
  std::vector<int> n;
  std::vector<double> d_K;
  double beta3;
  double slope;  // NaN when undefined
  double c_fit;  // max d_K sqrt(n) / beta3
  bool slope_defined;
};

/// d_K(omega, mu_n) over n_list and the log-log fit against n.
BerryEsseenFit berry_esseen_slope(const Measure& mu, const std::vector<int>& n_list,
                                  int resolution = kDefaultResolution);

}  // namespace freeclt
