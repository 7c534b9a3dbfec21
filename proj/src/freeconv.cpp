#include "freeclt/freeconv.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "freeclt/parallel.hpp"

namespace freeclt {
namespace {

constexpr int kMaxIterations = 10000;
constexpr double kTolerance = 1e-10;
constexpr double kDirectFloor = 1e-2;  // below this Im z the homotopy path is used
constexpr double kDensityY = 0.0;
constexpr double kFallbackY = 1e-3;

struct Reciprocal {
  cplx F;   // 1 / G
  cplx dF;  // -G' / G^2
};

Reciprocal reciprocal(const Measure& mu, cplx w) {
  const auto j = cauchy_jet(mu, w);
  if (j.g == 0.0) throw Error(ErrorKind::Division, "G vanishes during subordination");
  return {1.0 / j.g, -j.d1 / (j.g * j.g)};
}

class System {
 public:
  System(const std::vector<Block>& blocks, cplx z) : blocks_(blocks), z_(z) {}

  std::size_t size() const { return blocks_.size(); }

  // E_b = m_b w_b - z - sum_{c != b} m_c g_c(w_c) - (m_b - 1) F_b(w_b),  g = F - id
  Eigen::VectorXcd residual(const std::vector<cplx>& w, std::vector<Reciprocal>* cache = nullptr) const {
    const auto k = size();
    std::vector<Reciprocal> r(k);
    cplx total_g = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      r[b] = reciprocal(blocks_[b].measure, w[b]);
      total_g += static_cast<double>(blocks_[b].multiplicity) * (r[b].F - w[b]);
    }
    Eigen::VectorXcd e(static_cast<Eigen::Index>(k));
    for (std::size_t b = 0; b < k; ++b) {
      const double m = blocks_[b].multiplicity;
      const cplx others = total_g - m * (r[b].F - w[b]);
      e[static_cast<Eigen::Index>(b)] = m * w[b] - z_ - others - (m - 1.0) * r[b].F;
    }
    if (cache != nullptr) *cache = std::move(r);
    return e;
  }

  double norm(const Eigen::VectorXcd& e) const {
    double worst = 0.0;
    for (std::size_t b = 0; b < size(); ++b) {
      worst = std::max(worst, std::abs(e[static_cast<Eigen::Index>(b)]) / blocks_[b].multiplicity);
    }
    return worst;
  }

  Eigen::MatrixXcd jacobian(const std::vector<Reciprocal>& r) const {
    const auto k = static_cast<Eigen::Index>(size());
    Eigen::MatrixXcd J(k, k);
    for (Eigen::Index b = 0; b < k; ++b) {
      for (Eigen::Index c = 0; c < k; ++c) {
        const double mc = blocks_[static_cast<std::size_t>(c)].multiplicity;
        const cplx dF = r[static_cast<std::size_t>(c)].dF;
        J(b, c) = b == c ? mc - (mc - 1.0) * dF : -mc * (dF - 1.0);
      }
    }
    return J;
  }

  // One Gauss-Seidel sweep of the fixed-point map.
  void sweep(std::vector<cplx>& w, bool damped) const {
    for (std::size_t b = 0; b < size(); ++b) {
      cplx rhs = z_;
      for (std::size_t c = 0; c < size(); ++c) {
        const auto r = reciprocal(blocks_[c].measure, w[c]);
        const double mc = blocks_[c].multiplicity;
        rhs += c == b ? (mc - 1.0) * r.F : mc * (r.F - w[c]);
      }
      const cplx next = rhs / static_cast<double>(blocks_[b].multiplicity);
      w[b] = damped ? 0.5 * (w[b] + next) : next;
    }
  }

  bool admissible(const std::vector<cplx>& w) const {
    if (z_.imag() <= 0.0) return true;
    const double floor = z_.imag() * (1.0 - 1e-9) - 1e-14;
    return std::all_of(w.begin(), w.end(), [floor](cplx v) { return v.imag() >= floor; });
  }

  // Damped Newton; returns false when the iteration stalls.
  bool newton(std::vector<cplx>& w, int& iterations) const {
    std::vector<Reciprocal> r;
    Eigen::VectorXcd e = residual(w, &r);
    double res = norm(e);
    for (int it = 0; it < 80; ++it) {
      if (res <= 1e-16) return true;
      const Eigen::MatrixXcd J = jacobian(r);
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
      const Eigen::VectorXcd step = lu.solve(-e);
      if (!step.allFinite()) return false;
      ++iterations;
      bool accepted = false;
      for (double t = 1.0; t > 1e-4; t *= 0.5) {
        std::vector<cplx> trial = w;
        for (std::size_t b = 0; b < w.size(); ++b) trial[b] += t * step[static_cast<Eigen::Index>(b)];
        try {
          std::vector<Reciprocal> rt;
          Eigen::VectorXcd et = residual(trial, &rt);
          const double rn = norm(et);
          if (std::isfinite(rn) && rn < res) {
            w = std::move(trial);
            e = std::move(et);
            r = std::move(rt);
            const bool tiny = step.cwiseAbs().maxCoeff() * t <= 1e-15 * (1.0 + std::abs(w[0]));
            res = rn;
            accepted = true;
            if (tiny) return res <= kTolerance;
            break;
          }
        } catch (const Error&) {
        }
      }
      if (!accepted) return res <= kTolerance;
    }
    return res <= kTolerance;
  }

  std::vector<cplx> default_seed() const {
    double mean = 0.0, var = 0.0;
    for (const auto& b : blocks_) {
      mean += b.multiplicity * b.measure.mean();
      var += b.multiplicity * b.measure.variance();
    }
    const cplx F0 = var > 0.0 ? 1.0 / semicircle_cauchy(z_, mean, var) : z_ - mean;
    std::vector<cplx> w;
    for (const auto& b : blocks_) {
      cplx v = F0 + b.measure.mean() + b.measure.variance() / F0;
      if (z_.imag() > 0.0 && v.imag() < z_.imag()) v.imag(z_.imag() + 0.5 * (F0.imag() - z_.imag()));
      w.push_back(v);
    }
    return w;
  }

  cplx z() const { return z_; }
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  const std::vector<Block>& blocks_;
  cplx z_;
};

BlockSolution finish(const System& sys, std::vector<cplx> w, int iterations) {
  const double res = sys.norm(sys.residual(w));
  const cplx g = 1.0 / reciprocal(sys.blocks()[0].measure, w[0]).F;
  return {sys.z(), std::move(w), g, iterations, res};
}

// Fixed point with adaptive damping, interleaved with Newton attempts.
BlockSolution solve_direct(const System& sys, std::vector<cplx> w) {
  int iterations = 0;
  double prev = std::numeric_limits<double>::infinity();
  int increases = 0;
  bool damped = false;
  int last_newton = -1000;
  double res = prev;
  for (int sweep = 0; sweep < kMaxIterations; ++sweep) {
    res = sys.norm(sys.residual(w));
    if (res <= 1e-13) return finish(sys, std::move(w), iterations);
    const bool try_newton = (sweep >= 20 || res < 1e-4) && sweep - last_newton >= 100;
    if (try_newton) {
      last_newton = sweep;
      std::vector<cplx> trial = w;
      int nit = 0;
      const bool ok = sys.newton(trial, nit);
      iterations += nit;
      if (ok && sys.admissible(trial)) return finish(sys, std::move(trial), iterations);
    }
    if (res > prev && ++increases >= 2) damped = true;
    prev = res;
    sys.sweep(w, damped);
    ++iterations;
    if (iterations >= kMaxIterations) break;
  }
  res = sys.norm(sys.residual(w));
  if (res <= kTolerance && sys.admissible(w)) return finish(sys, std::move(w), iterations);
  throw NonConvergenceError("subordination fixed point", res, iterations);
}

// Follows the solution along the segment [from, to] with adaptive steps.
// Steps are capped at half the distance to the real axis so that the path
// never jumps across a branch point.
std::vector<cplx> track(const std::vector<Block>& blocks, std::vector<cplx> w, cplx from, cplx to,
                        int& iterations) {
  const double length = std::abs(to - from);
  if (length == 0.0) return w;
  const double floor = to.imag() >= 0.0 ? 1e-6 : 1e-3;
  double t = 0.0, dt = 1.0;
  int failures = 0;
  while (t < 1.0) {
    const cplx here = from + t * (to - from);
    const double cap = std::max(floor, 0.5 * std::abs(here.imag())) / length;
    const double step = std::min({dt, cap, 1.0 - t});
    const double next_t = t + step;
    const System sys(blocks, from + next_t * (to - from));
    std::vector<cplx> trial = w;
    int nit = 0;
    const bool ok = sys.newton(trial, nit) && sys.admissible(trial);
    iterations += nit;
    if (ok) {
      w = std::move(trial);
      t = next_t;
      dt = 2.0 * step;
    } else {
      dt = 0.25 * step;
      if (++failures > 200 || dt < 1e-12) {
        const System sys_here(blocks, here);
        throw NonConvergenceError("continuation stalled at z = (" + std::to_string(here.real()) + ", " +
                                      std::to_string(here.imag()) + ")",
                                  sys_here.norm(sys_here.residual(w)), iterations);
      }
    }
  }
  return w;
}

// Newton continuation from Im z = 1. Targets on or above the axis are reached
// vertically. Targets below it cross the axis at Re z = 0, which lies inside
// the support of every standardized law here, then move horizontally.
BlockSolution solve_homotopy(const std::vector<Block>& blocks, cplx z) {
  const double target = z.imag();
  int iterations = 0;
  std::vector<cplx> w;
  if (target >= 0.0) {
    const cplx top(z.real(), 1.0);
    const System sys(blocks, top);
    auto sol = solve_direct(sys, sys.default_seed());
    iterations = sol.iterations;
    w = track(blocks, sol.omega, top, z, iterations);
  } else {
    const double yc = std::min(target, -0.02);
    const cplx top(0.0, 1.0);
    const System sys(blocks, top);
    auto sol = solve_direct(sys, sys.default_seed());
    iterations = sol.iterations;
    w = track(blocks, sol.omega, top, cplx(0.0, yc), iterations);
    w = track(blocks, std::move(w), cplx(0.0, yc), cplx(z.real(), yc), iterations);
    w = track(blocks, std::move(w), cplx(z.real(), yc), z, iterations);
  }
  const System fin(blocks, z);
  BlockSolution out = finish(fin, std::move(w), iterations);
  if (!(out.residual <= kTolerance)) {
    throw NonConvergenceError("continuation endpoint", out.residual, iterations);
  }
  return out;
}

void check_blocks(const std::vector<Block>& blocks) {
  if (blocks.empty()) throw Error(ErrorKind::Domain, "no blocks to convolve");
  for (const auto& b : blocks) {
    if (b.multiplicity < 1) throw Error(ErrorKind::Domain, "block multiplicity must be positive");
  }
}

void check_normalized(const Measure& mu) {
  const double m = mu.mean(), v = mu.variance();
  if (std::abs(m) > 1e-8 || std::abs(v - 1.0) > 1e-8) {
    throw Error(ErrorKind::Normalization, "measure must have zero mean and unit variance (mean " +
                                              std::to_string(m) + ", variance " + std::to_string(v) + ")");
  }
}

}  // namespace

BlockSolution solve_blocks(const std::vector<Block>& blocks, cplx z, const std::vector<cplx>* seed) {
  check_blocks(blocks);
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw Error(ErrorKind::Domain, "non-finite z");
  if (z.imag() >= kDirectFloor) {
    const System sys(blocks, z);
    return solve_direct(sys, seed != nullptr ? *seed : sys.default_seed());
  }
  if (z.imag() <= 0.0) {
    for (const auto& b : blocks) {
      if (b.measure.as<GridDensity>() != nullptr) {
        throw Error(ErrorKind::Domain, "grid measures are only supported for Im z > 0");
      }
    }
  }
  if (seed != nullptr) {
    const System sys(blocks, z);
    std::vector<cplx> w = *seed;
    int nit = 0;
    if (sys.newton(w, nit) && sys.admissible(w)) return finish(sys, std::move(w), nit);
  }
  return solve_homotopy(blocks, z);
}

SubordinationSolution convolve_pair(const Measure& mu1, const Measure& mu2, cplx z) {
  if (!(z.imag() > 0.0)) throw Error(ErrorKind::Domain, "convolve_pair needs Im z > 0");
  const auto pack = [&](cplx Z1, cplx Z2, int iterations) {
    const cplx F1 = reciprocal_transform(mu1, Z1);
    const cplx F2 = reciprocal_transform(mu2, Z2);
    const double residual = std::abs(z - Z1 - Z2 + F1) + std::abs(F1 - F2);
    return SubordinationSolution{z, Z1, Z2, 1.0 / F1, iterations, residual};
  };
  if (mu1.is_point_mass() || mu2.is_point_mass()) {
    const bool first = mu1.is_point_mass();
    const double a = (first ? mu1 : mu2).atom_list()[0].position;
    const Measure& other = first ? mu2 : mu1;
    const cplx Zo = z - a;
    const cplx Zp = reciprocal_transform(other, Zo) + a;
    return first ? pack(Zp, Zo, 0) : pack(Zo, Zp, 0);
  }
  const auto sol = solve_blocks({{mu1, 1}, {mu2, 1}}, z);
  auto out = pack(sol.omega[0], sol.omega[1], sol.iterations);
  if (!(out.residual <= kTolerance)) {
    throw NonConvergenceError("pair subordination", out.residual, sol.iterations);
  }
  return out;
}

BlockSolution clt_solve(const Measure& mu, int n, cplx z) {
  if (n < 1) throw Error(ErrorKind::Domain, "n must be positive");
  check_normalized(mu);
  return solve_blocks({{dilate(mu, 1.0 / std::sqrt(static_cast<double>(n))), n}}, z);
}

cplx clt_cauchy(const Measure& mu, int n, cplx z) { return clt_solve(mu, n, z).g_value; }

double clt_density(const Measure& mu, int n, double x) {
  const double v = -clt_cauchy(mu, n, cplx(x, kDensityY)).imag() / std::numbers::pi;
  if (v >= 0.0) return v;
  if (v >= -1e-8) return 0.0;
  throw Error(ErrorKind::Accuracy, "negative density from the subordination solver");
}

namespace {

constexpr int kThetaNodes = 2049;
constexpr double kEdgeDensity = 1e-10;

}  // namespace

CltMeasure clt_measure(const Measure& mu, int n, double a, double b, int count) {
  if (n < 1) throw Error(ErrorKind::Domain, "n must be positive");
  if (count < 2 || !(b > a)) throw Error(ErrorKind::Domain, "grid needs a < b and at least 2 points");
  check_normalized(mu);
  const Measure nu = dilate(mu, 1.0 / std::sqrt(static_cast<double>(n)));
  const std::vector<Block> blocks{{nu, n}};

  std::vector<double> residuals;
  std::mutex m;
  const auto dens = [&](double x) {
    const auto sol = solve_blocks(blocks, cplx(x, kDensityY));
    {
      std::lock_guard lock(m);
      residuals.push_back(sol.residual);
    }
    const double v = -sol.g_value.imag() / std::numbers::pi;
    return v > 0.0 ? v : 0.0;
  };
  const auto tabulate = [&](const std::vector<double>& xs) {
    std::vector<double> out(xs.size());
    parallel_for(xs.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) out[i] = dens(xs[i]);
    });
    return out;
  };

  CltMeasure cm{mu, n, {}, {}, GridDensity{a, b, Eigen::ArrayXd()}, 0.0, 0.0, 0.0, 0.0, {}, {}};

  // support edges
  const double reach = 2.0 + 4.0 / std::sqrt(static_cast<double>(n));
  constexpr int kScan = 801;
  std::vector<double> scan(kScan);
  for (int i = 0; i < kScan; ++i) scan[i] = -reach + 2.0 * reach * i / (kScan - 1);
  const auto scan_d = tabulate(scan);
  int first = -1, last = -1;
  for (int i = 0; i < kScan; ++i) {
    if (scan_d[i] >= kEdgeDensity) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) throw Error(ErrorKind::Normalization, "no absolutely continuous part detected");
  const auto bisect = [&](double out, double in) {
    for (int it = 0; it < 60 && std::abs(in - out) > 1e-13; ++it) {
      const double mid = 0.5 * (in + out);
      (dens(mid) >= kEdgeDensity ? in : out) = mid;
    }
    return 0.5 * (in + out);
  };
  cm.lo = first > 0 ? bisect(scan[first - 1], scan[first]) : scan[0];
  cm.hi = last < kScan - 1 ? bisect(scan[last + 1], scan[last]) : scan[kScan - 1];

  // cumulative distribution in the arc variable
  const double c = 0.5 * (cm.lo + cm.hi), r = 0.5 * (cm.hi - cm.lo);
  std::vector<double> tx(kThetaNodes);
  for (int j = 0; j < kThetaNodes; ++j) tx[j] = c - r * std::cos(std::numbers::pi * j / (kThetaNodes - 1));
  std::vector<double> td(kThetaNodes, 0.0);
  {
    std::vector<double> inner(tx.begin() + 1, tx.end() - 1);
    const auto v = tabulate(inner);
    std::copy(v.begin(), v.end(), td.begin() + 1);
  }
  td[0] = std::max(0.0, 2.0 * td[1] - td[2]);
  td[kThetaNodes - 1] = std::max(0.0, 2.0 * td[kThetaNodes - 2] - td[kThetaNodes - 3]);
  const double dt = std::numbers::pi / (kThetaNodes - 1);
  std::vector<double> f(kThetaNodes);
  for (int j = 0; j < kThetaNodes; ++j) f[j] = td[j] * r * std::sin(j * dt);
  f[0] = std::max(0.0, 2.0 * f[1] - f[2]);
  f[kThetaNodes - 1] = std::max(0.0, 2.0 * f[kThetaNodes - 2] - f[kThetaNodes - 3]);
  cm.theta_cdf.assign(kThetaNodes, 0.0);
  for (int j = 1; j < kThetaNodes; ++j) cm.theta_cdf[j] = cm.theta_cdf[j - 1] + 0.5 * dt * (f[j - 1] + f[j]);
  cm.theta_pdf = std::move(td);
  cm.mass = cm.theta_cdf.back();

  // requested grid
  cm.xs.resize(count);
  for (int i = 0; i < count; ++i) cm.xs[i] = a + (b - a) * i / (count - 1);
  cm.density = tabulate(cm.xs);
  cm.grid_density.samples = Eigen::Map<const Eigen::ArrayXd>(cm.density.data(), count);

  cm.subordination_residual_sup = residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
  return cm;
}

double CltMeasure::cdf(double x) const {
  if (x <= lo) return 0.0;
  if (x >= hi) return mass;
  const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  const double theta = std::acos(std::clamp((c - x) / r, -1.0, 1.0));
  const int N = static_cast<int>(theta_cdf.size());
  const double dt = std::numbers::pi / (N - 1);
  const int j = std::clamp(static_cast<int>(theta / dt), 0, N - 2);
  const double t = theta / dt - j;
  // cubic Hermite with dC/dtheta = p(x(theta)) r sin(theta)
  const auto slope = [&](int k) { return theta_pdf[k] * r * std::sin(k * dt) * dt; };
  const double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
  const double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
  const double v = h00 * theta_cdf[j] + h10 * slope(j) + h01 * theta_cdf[j + 1] + h11 * slope(j + 1);
  return std::clamp(v, 0.0, mass);
}

double CltMeasure::pdf(double x) const {
  if (x < lo || x > hi) return 0.0;
  const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  const double theta = std::acos(std::clamp((c - x) / r, -1.0, 1.0));
  const int N = static_cast<int>(theta_pdf.size());
  const double dt = std::numbers::pi / (N - 1);
  const int j = std::clamp(static_cast<int>(theta / dt), 0, N - 2);
  const double t = theta / dt - j;
  return (1.0 - t) * theta_pdf[j] + t * theta_pdf[j + 1];
}

Measure CltMeasure::to_measure(int samples) const {
  if (samples < 16) throw Error(ErrorKind::Domain, "need at least 16 samples");
  Eigen::ArrayXd s(samples);
  for (int i = 0; i < samples; ++i) s[i] = pdf(lo + (hi - lo) * i / (samples - 1));
  const double h = (hi - lo) / (samples - 1);
  const double m = h * (s.sum() - 0.5 * (s[0] + s[samples - 1]));
  if (!(m > 0.0)) throw Error(ErrorKind::Normalization, "empty density");
  s /= m;
  return Measure::grid(lo, hi, std::move(s));
}

Measure block_measure(const std::vector<Block>& blocks, int samples) {
  if (samples < 16) throw Error(ErrorKind::Domain, "need at least 16 samples");
  check_blocks(blocks);
  double lo = 0.0, hi = 0.0;
  for (const auto& b : blocks) {
    const auto [a, c] = b.measure.support();
    lo += b.multiplicity * a;
    hi += b.multiplicity * c;
  }
  if (!(hi > lo)) throw Error(ErrorKind::InvalidMeasure, "free convolution is a point mass");
  Eigen::ArrayXd s(samples);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
      double v;
      try {
        v = -solve_blocks(blocks, cplx(x, kDensityY)).g_value.imag() / std::numbers::pi;
      } catch (const NonConvergenceError&) {
        // the axis limit is singular where the transform vanishes (inside gaps of
        // the support); extrapolate from the upper half plane instead
        const auto at = [&](double y) {
          const System sys(blocks, cplx(x, y));
          return -solve_direct(sys, sys.default_seed()).g_value.imag() / std::numbers::pi;
        };
        v = 2.0 * at(kFallbackY) - at(2.0 * kFallbackY);
      }
      s[static_cast<Eigen::Index>(i)] = v > 0.0 ? v : 0.0;
    }
  });
  const double h = (hi - lo) / (samples - 1);
  const double m = h * (s.sum() - 0.5 * (s[0] + s[samples - 1]));
  if (!(m > 0.0)) throw Error(ErrorKind::Normalization, "empty density");
  s /= m;
  return Measure::grid(lo, hi, std::move(s));
}

GapGrid continuation_gap(const Measure& mu, int n, const EvalWindow& window, int nx, int ny) {
  if (nx < 2 || ny < 1) throw Error(ErrorKind::Domain, "gap grid needs nx >= 2 and ny >= 1");
  GapGrid out;
  const Rect& K = window.K;
  for (int i = 0; i < nx; ++i) {
    const double x = K.x_lo + (K.x_hi - K.x_lo) * i / (nx - 1);
    for (int j = 0; j < ny; ++j) {
      const double y = -K.y_max + 2.0 * K.y_max * (j + 0.5) / ny;
      out.z.emplace_back(x, y);
    }
  }
  out.gap.resize(out.z.size());
  parallel_for(out.z.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      out.gap[k] = clt_cauchy(mu, n, out.z[k]) - semicircle_cauchy(out.z[k]);
    }
  });
  for (const auto& g : out.gap) out.sup = std::max(out.sup, std::abs(g));
  return out;
}

cplx partial_convolution(const Measure& mu, const std::vector<double>& epsilons, const Measure& nu, cplx z) {
  std::map<double, int> counts;
  for (double e : epsilons) {
    if (!std::isfinite(e)) throw Error(ErrorKind::Domain, "non-finite epsilon");
    if (e != 0.0) ++counts[e];
  }
  if (counts.empty()) return cauchy(nu, z);
  std::vector<Block> blocks{{nu, 1}};
  for (const auto& [e, m] : counts) blocks.push_back({dilate(mu, e), m});
  return solve_blocks(blocks, z).g_value;
}

}  // namespace freeclt
