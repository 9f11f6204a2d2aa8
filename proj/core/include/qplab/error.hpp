#pragma once

#include <stdexcept>
#include <string>

namespace qplab {

enum class ErrorKind {
  RationalInput,
  LengthMismatch,
  OutOfAnnulus,
  PoleProximity,
  NotHermitian,
  KernelDecay,
  InvalidArgument,
  BadRadii,
  PoleTooClose,
  NormalizationError,
  DepthExceeded,
  SingularWindow,
  InsufficientData,
  AllSingular,
  BadSizes,
  HypothesisFailed,
  EigenFailure,
  ConfigError,
};

const char* to_string(ErrorKind kind) noexcept;

// Base for every error raised by the library. The kind lets callers (the CLI
// in particular) map failures onto exit codes without RTTI chains.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// |f| fell below the pole guard at an orbit point.
class PoleProximityError : public Error {
 public:
  PoleProximityError(double x, double abs_f, long index)
      : Error(ErrorKind::PoleProximity,
              "orbit point x=" + std::to_string(x) + " (index " + std::to_string(index) +
                  ") has |f|=" + std::to_string(abs_f)),
        x_(x),
        abs_f_(abs_f),
        index_(index) {}

  double x() const noexcept { return x_; }
  double abs_f() const noexcept { return abs_f_; }
  long index() const noexcept { return index_; }

 private:
  double x_;
  double abs_f_;
  long index_;
};

}  // namespace qplab
