#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeclt/measure.hpp"

namespace freeclt::cli {

/// Thrown for invalid flags or inputs; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  double a;
  double b;
  int count;
};

/// "a:b:count" with a < b and count >= 2.
GridSpec parse_grid(const std::string& text);
std::vector<double> grid_points(const GridSpec& g);

/// Builtin name (normalized to zero mean and unit variance), inline JSON, or a path to a JSON file.
Measure resolve_measure(const std::string& spec);

/// 15 significant digits.
std::string format_number(double v);

/// Exit codes: 0 success, 1 numerical quality failure, 2 usage or parse failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace freeclt::cli
