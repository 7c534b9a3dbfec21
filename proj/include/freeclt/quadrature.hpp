#pragma once

#include <span>

namespace freeclt::quad {

/// Composite Gauss-Legendre rule (20 nodes per panel) on [a, b].
template <class F>
double integrate(F&& f, double a, double b, int panels = 16);

std::span<const double> gl_nodes();
std::span<const double> gl_weights();

template <class F>
double integrate(F&& f, double a, double b, int panels) {
  if (!(b > a)) return 0.0;
  const auto x = gl_nodes();
  const auto w = gl_weights();
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(mid + 0.5 * h * x[i]);
    total += 0.5 * h * acc;
  }
  return total;
}

}  // namespace freeclt::quad
