#include "qplab/torus.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qplab/error.hpp"

namespace qplab {

namespace {

constexpr double kRationalTolerance = 1e-14;

// Signed error omega - p/q evaluated with one rounding in the numerator.
double convergent_error(double omega, std::int64_t p, std::int64_t q) {
  return std::fma(omega, static_cast<double>(q), -static_cast<double>(p)) / static_cast<double>(q);
}

// Walks the continued fraction of omega, calling visit(convergent) for k >= 1
// until visit returns false. Throws RationalInput if the remainder vanishes.
template <class Visit>
void walk_convergents(double omega, Visit&& visit) {
  std::int64_t p_prev = 1, q_prev = 0;  // p_{-1}, q_{-1}
  std::int64_t p_cur = 0, q_cur = 1;    // p_0, q_0 (a_0 = 0)
  double x = omega;
  for (;;) {
    if (x == 0.0) throw Error(ErrorKind::RationalInput, "continued fraction terminated");
    const double inv = 1.0 / x;
    if (!(inv < 9.0e15)) throw Error(ErrorKind::RationalInput, "partial quotient overflow");
    const auto a = static_cast<std::int64_t>(std::floor(inv));
    x = inv - static_cast<double>(a);
    const std::int64_t p_next = a * p_cur + p_prev;
    const std::int64_t q_next = a * q_cur + q_prev;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
    const double err = std::abs(convergent_error(omega, p_cur, q_cur));
    if (!visit(Convergent{a, p_cur, q_cur, err})) return;
  }
}

}  // namespace

double torus_dist(double x) noexcept { return std::abs(x - std::nearbyint(x)); }

double wrap_unit(double x) noexcept {
  double r = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.
  if (r >= 1.0) r = 0.0;
  return r;
}

Frequency::Frequency(double omega, double a, double A, std::int64_t max_denominator)
    : omega_(omega), a_(a), A_(A) {
  if (!(omega > 0.0 && omega < 1.0))
    throw Error(ErrorKind::InvalidArgument, "omega must lie in (0,1)");
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "Diophantine constant a must be > 0");
  if (!(A >= 1.0)) throw Error(ErrorKind::InvalidArgument, "Diophantine exponent A must be >= 1");
  walk_convergents(omega, [&](const Convergent& c) {
    if (c.q > max_denominator) return false;
    if (c.err < kRationalTolerance)
      throw Error(ErrorKind::RationalInput,
                  "omega is within 1e-14 of " + std::to_string(c.p) + "/" + std::to_string(c.q));
    return true;
  });
}

ConvergentList continued_fraction(double omega, int depth) {
  if (!(omega > 0.0 && omega < 1.0))
    throw Error(ErrorKind::InvalidArgument, "omega must lie in (0,1)");
  if (depth < 1) throw Error(ErrorKind::InvalidArgument, "depth must be >= 1");
  ConvergentList out;
  out.reserve(static_cast<std::size_t>(depth));
  walk_convergents(omega, [&](const Convergent& c) {
    out.push_back(c);
    if (static_cast<int>(out.size()) == depth) return false;
    if (c.err < kRationalTolerance)
      throw Error(ErrorKind::RationalInput,
                  "expansion terminates at " + std::to_string(c.p) + "/" + std::to_string(c.q) +
                      " before depth " + std::to_string(depth));
    return true;
  });
  return out;
}

DiophantineReport diophantine_check(const Frequency& freq, std::int64_t K) {
  if (K < 1) throw Error(ErrorKind::InvalidArgument, "K must be >= 1");
  DiophantineReport rep;
  rep.K = K;
  rep.worst_ratio = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 1; k <= K; ++k) {
    const double kd = static_cast<double>(k);
    const double norm = torus_dist(orbit_point(0.0, freq.omega(), k));
    const double ratio = norm * std::pow(kd, freq.A()) / freq.a();
    if (ratio < rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_k = k;
    }
    if (rep.pass && !(ratio > 1.0)) {
      rep.pass = false;
      rep.first_violation = k;
      rep.first_violation_ratio = ratio;
    }
  }
  return rep;
}

double orbit_point(double x0, double omega, std::int64_t n) noexcept {
  const double nd = static_cast<double>(n);
  const double prod = nd * omega;
  const double low = std::fma(nd, omega, -prod);  // exact rounding error of prod
  const double frac = prod - std::floor(prod);    // exact
  return wrap_unit(wrap_unit(frac + x0) + low);
}

std::vector<TorusPoint> orbit(TorusPoint x0, double omega, std::int64_t n_lo, std::int64_t n_hi) {
  if (n_lo > n_hi) throw Error(ErrorKind::InvalidArgument, "orbit requires n_lo <= n_hi");
  std::vector<TorusPoint> out;
  out.reserve(static_cast<std::size_t>(n_hi - n_lo + 1));
  for (std::int64_t n = n_lo; n <= n_hi; ++n) out.emplace_back(orbit_point(x0.value(), omega, n));
  return out;
}

double weighted_average(std::span<const double> u, std::int64_t M) {
  if (M < 1) throw Error(ErrorKind::InvalidArgument, "M must be >= 1");
  if (u.size() != static_cast<std::size_t>(2 * M - 1))
    throw Error(ErrorKind::LengthMismatch, "expected " + std::to_string(2 * M - 1) +
                                               " values, got " + std::to_string(u.size()));
  // Integer weights, one division at the end: the weights sum to M^2 exactly.
  double acc = 0.0;
  for (std::int64_t m = -(M - 1); m <= M - 1; ++m)
    acc += static_cast<double>(M - std::abs(m)) * u[static_cast<std::size_t>(m + M - 1)];
  return acc / (static_cast<double>(M) * static_cast<double>(M));
}

}  // namespace qplab
