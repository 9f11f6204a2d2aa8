#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qplab {

/// Distance from x to the nearest integer, in [0, 1/2].
double torus_dist(double x) noexcept;

/// Reduces x into [0, 1).
double wrap_unit(double x) noexcept;

/// A point of the circle group R/Z stored as its representative in [0, 1).
class TorusPoint {
 public:
  constexpr TorusPoint() = default;
  explicit TorusPoint(double x) noexcept : value_(wrap_unit(x)) {}

  double value() const noexcept { return value_; }

  TorusPoint operator+(double shift) const noexcept { return TorusPoint(value_ + shift); }
  TorusPoint operator-(double shift) const noexcept { return TorusPoint(value_ - shift); }
  friend bool operator==(TorusPoint, TorusPoint) = default;

 private:
  double value_ = 0.0;
};

/// Rotation number together with the Diophantine constants (a, A) of the
/// condition ||k omega|| > a |k|^-A.
class Frequency {
 public:
  /// Throws InvalidArgument unless 0 < omega < 1, a > 0, A >= 1, and
  /// RationalInput if some convergent with q <= max_denominator is exact.
  Frequency(double omega, double a = 0.1, double A = 2.0,
            std::int64_t max_denominator = 1'000'000);

  double omega() const noexcept { return omega_; }
  double a() const noexcept { return a_; }
  double A() const noexcept { return A_; }

 private:
  double omega_;
  double a_;
  double A_;
};

struct Convergent {
  std::int64_t a;  // partial quotient a_k
  std::int64_t p;
  std::int64_t q;
  double err;  // |omega - p/q|
};

using ConvergentList = std::vector<Convergent>;

/// Convergents p_k/q_k, k = 1..depth, of the continued fraction of omega in
/// (0, 1). The k = 0 convergent 0/1 is omitted so q is strictly increasing.
/// Throws RationalInput when a convergent before the last is exact to 1e-14.
ConvergentList continued_fraction(double omega, int depth);

struct DiophantineReport {
  bool pass = true;
  std::int64_t K = 0;
  // Smallest k violating ||k omega|| > a k^-A (0 when pass).
  std::int64_t first_violation = 0;
  double first_violation_ratio = 0.0;
  // min over k <= K of ||k omega|| k^A / a, and where it is attained.
  double worst_ratio = 0.0;
  std::int64_t worst_k = 0;
};

/// Finite-range Diophantine check over 0 < k <= K (negative k are symmetric).
DiophantineReport diophantine_check(const Frequency& freq, std::int64_t K);

/// x0 + n*omega mod 1 for n in [n_lo, n_hi]. Each point is computed directly
/// from n with an error-free product, so there is no drift along the orbit.
std::vector<TorusPoint> orbit(TorusPoint x0, double omega, std::int64_t n_lo, std::int64_t n_hi);

/// Single orbit point x0 + n*omega mod 1, accurate to a few ulp of 1.
double orbit_point(double x0, double omega, std::int64_t n) noexcept;

/// Fejer-weighted ergodic average sum_{|m|<M} (M-|m|)/M^2 u[m + M - 1].
/// Throws LengthMismatch unless u.size() == 2M - 1.
double weighted_average(std::span<const double> u, std::int64_t M);

}  // namespace qplab
