#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qplab/functions.hpp"

namespace qplab {

/// [lower, upper] bracket for the Lebesgue measure of a subset of the torus
/// resolved down to dyadic intervals of length 2^-depth.
struct MeasureBracket {
  double lower = 0.0;
  double upper = 0.0;
  int depth = 0;
  std::int64_t undecided = 0;  // number of depth-level intervals left undecided

  double resolution() const noexcept;
  double midpoint() const noexcept { return 0.5 * (lower + upper); }
};

/// Membership predicate of the set being measured.
using Membership = std::function<bool(double)>;

inline constexpr int kMaxSublevelDepth = 24;

/// Adaptive dyadic bisection of [0,1). Every interval at level < min_level is
/// split unconditionally; past that an interval is classified IN (OUT) when
/// all 9 points of its two-level refinement are in (out), otherwise it is split
/// until `depth`, where it stays undecided. Throws DepthExceeded when the
/// undecided mass exceeds 1/2 and InvalidArgument for depth outside [1, 24].
MeasureBracket measure_set(const Membership& inside, int depth, int min_level = 10);

/// mes{x : |fn(x)| < threshold} for a black-box fn, classified by sampling.
MeasureBracket sublevel_measure(const std::function<double(double)>& fn, double threshold, int depth);

/// mes{x : |h(x)| < threshold} with certified brackets: intervals are
/// classified from the value, slope and a curvature bound of h, so the true
/// measure always lies in [lower, upper].
MeasureBracket sublevel_measure(const TrigPolynomial& h, double threshold, int depth);

/// mes{x : |g(x) - E f(x)| / sqrt(1+E^2) < eps}, certified like the
/// trigonometric sublevel_measure.
MeasureBracket normalized_linear_measure(const MeromorphicPotential& p, double E, double eps, int depth);

/// mes{x : |v(x) - E| < eps}, tested as |g - E f| < eps |f| so poles of v
/// never produce overflow. Certified.
MeasureBracket potential_measure(const MeromorphicPotential& p, double E, double eps, int depth);

struct ExponentSample {
  double eps;
  MeasureBracket bracket;
};

/// Least-squares fit measure ~ K eps^c on bracket midpoints.
struct ExponentFit {
  double c = 0.0;
  double log_K = 0.0;
  double r2 = 0.0;
  std::vector<ExponentSample> samples;
};

/// Fits log(midpoint) against log(eps) over samples with positive midpoint.
/// Throws InsufficientData with fewer than two usable samples.
ExponentFit fit_exponent(std::vector<ExponentSample> samples);

/// Empirical Lojasiewicz exponent of v = g/f at level E. eps_list must have
/// at least 4 entries spanning at least 3 decades.
ExponentFit lojasiewicz_fit(const MeromorphicPotential& p, double E, std::span<const double> eps_list,
                            int depth);

/// 5 log-spaced points per decade over [1e-5, 1e-1] (21 values).
std::vector<double> default_eps_list();

}  // namespace qplab
