#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace freeclt::cli {

namespace {

constexpr double kWidth = 800, kHeight = 600;
constexpr double kLeft = 70, kRight = 20, kTop = 50, kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_plot(const std::vector<double>& xs, const std::vector<Curve>& curves, const std::string& title) {
  if (xs.size() < 2) throw std::invalid_argument("plot needs at least two x values");
  double y_lo = 0.0, y_hi = 0.0;
  bool first = true;
  for (const auto& c : curves) {
    if (c.y.size() != xs.size()) throw std::invalid_argument("curve length differs from x grid");
    for (double v : c.y) {
      if (!std::isfinite(v)) continue;
      y_lo = first ? v : std::min(y_lo, v);
      y_hi = first ? v : std::max(y_hi, v);
      first = false;
    }
  }
  y_lo = std::min(y_lo, 0.0);
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  y_hi += 0.05 * (y_hi - y_lo);
  const double x_lo = xs.front(), x_hi = xs.back();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  const auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"600\" "
        "viewBox=\"0 0 800 600\">\n"
     << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n"
     << "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">"
     << escape(title) << "</text>\n";
  // axes with five ticks each
  os << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
     << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
     << num(kTop + ph) << "\"/>\n"
     << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
     << num(kTop + ph) << "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double tx = x_lo + (x_hi - x_lo) * i / 4.0, ty = y_lo + (y_hi - y_lo) * i / 4.0;
    os << "<line x1=\"" << num(px(tx)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(tx)) << "\" y2=\""
       << num(kTop + ph + 6) << "\"/>\n"
       << "<line x1=\"" << num(kLeft - 6) << "\" y1=\"" << num(py(ty)) << "\" x2=\"" << num(kLeft) << "\" y2=\""
       << num(py(ty)) << "\"/>\n";
  }
  os << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double tx = x_lo + (x_hi - x_lo) * i / 4.0, ty = y_lo + (y_hi - y_lo) * i / 4.0;
    os << "<text x=\"" << num(px(tx)) << "\" y=\"" << num(kTop + ph + 22) << "\" text-anchor=\"middle\">" << tick(tx)
       << "</text>\n"
       << "<text x=\"" << num(kLeft - 10) << "\" y=\"" << num(py(ty) + 4) << "\" text-anchor=\"end\">" << tick(ty)
       << "</text>\n";
  }
  os << "</g>\n";

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    os << "<path fill=\"none\" stroke=\"" << (c.dashed ? "#c0392b" : "#1f4e79") << "\" stroke-width=\"2\""
       << (c.dashed ? " stroke-dasharray=\"8 5\"" : "") << " d=\"";
    bool pen_down = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(c.y[i])) {
        pen_down = false;
        continue;
      }
      os << (pen_down ? " L" : (i ? " M" : "M")) << num(px(xs[i])) << "," << num(py(c.y[i]));
      pen_down = true;
    }
    os << "\"/>\n";
    const double ly = kTop + 20 + 20 * static_cast<double>(k);
    os << "<line x1=\"" << num(kLeft + pw - 200) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kLeft + pw - 160)
       << "\" y2=\"" << num(ly) << "\" stroke=\"" << (c.dashed ? "#c0392b" : "#1f4e79") << "\" stroke-width=\"2\""
       << (c.dashed ? " stroke-dasharray=\"8 5\"" : "") << "/>\n"
       << "<text x=\"" << num(kLeft + pw - 152) << "\" y=\"" << num(ly + 4)
       << "\" font-family=\"sans-serif\" font-size=\"13\">" << escape(c.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace freeclt::cli
