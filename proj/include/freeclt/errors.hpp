#pragma once

#include <stdexcept>
#include <string>

namespace freeclt {

enum class ErrorKind {
  InvalidMeasure,
  UnsupportedOrder,
  DegenerateDilation,
  Domain,
  Pole,
  Accuracy,
  Division,
  NonConvergence,
  Normalization,
  Window,
  Singular,
  Parse,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the fixed-point and Newton solvers; carries the last residual so
// callers can report how far off the iteration stopped.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual, int iterations)
      : Error(ErrorKind::NonConvergence,
              what + " (residual " + std::to_string(residual) + " after " +
                  std::to_string(iterations) + " iterations)"),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace freeclt
