#include "qplab/sublevel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qplab/error.hpp"
#include "qplab/parallel.hpp"

namespace qplab {

double MeasureBracket::resolution() const noexcept { return std::ldexp(1.0, -depth); }

namespace {

struct Tally {
  std::int64_t in_units = 0;
  std::int64_t undecided_units = 0;
  std::int64_t undecided = 0;
};

// 0 = out, 1 = in, -1 = mixed.
using Classifier = std::function<int(double lo, double width)>;

int classify(const Membership& inside, double lo, double width) {
  const bool first = inside(lo);
  for (int j = 1; j <= 8; ++j)
    if (inside(lo + width * j / 8.0) != first) return -1;
  return first ? 1 : 0;
}

void refine(const Classifier& classify, int level, std::int64_t index, int depth, int min_level, Tally& t) {
  const double width = std::ldexp(1.0, -level);
  const double lo = static_cast<double>(index) * width;
  const std::int64_t units = std::int64_t{1} << (depth - level);
  if (level >= min_level) {
    const int cls = classify(lo, width);
    if (cls == 1) {
      t.in_units += units;
      return;
    }
    if (cls == 0) return;
    if (level == depth) {
      t.undecided_units += units;
      ++t.undecided;
      return;
    }
  }
  refine(classify, level + 1, 2 * index, depth, min_level, t);
  refine(classify, level + 1, 2 * index + 1, depth, min_level, t);
}

MeasureBracket bisect(const Classifier& classify, int depth, int min_level) {
  if (depth < 1 || depth > kMaxSublevelDepth)
    throw Error(ErrorKind::InvalidArgument, "depth must lie in [1, 24]");
  min_level = std::clamp(min_level, 0, depth);
  const std::size_t roots = std::size_t{1} << min_level;
  std::vector<Tally> tallies(roots);
  parallel::for_each_index(roots, [&](std::size_t i) {
    refine(classify, min_level, static_cast<std::int64_t>(i), depth, min_level, tallies[i]);
  });
  Tally total;
  for (const auto& t : tallies) {
    total.in_units += t.in_units;
    total.undecided_units += t.undecided_units;
    total.undecided += t.undecided;
  }
  MeasureBracket b;
  b.depth = depth;
  b.undecided = total.undecided;
  b.lower = std::ldexp(static_cast<double>(total.in_units), -depth);
  b.upper = std::ldexp(static_cast<double>(total.in_units + total.undecided_units), -depth);
  if (b.upper - b.lower > 0.5)
    throw Error(ErrorKind::DepthExceeded,
                "undecided mass " + std::to_string(b.upper - b.lower) + " at depth " + std::to_string(depth));
  return b;
}

// Range of |h| on [c - r, c + r] from the value and slope at c and the
// curvature bound sum (2 pi n)^2 |h_n|.
struct Enclosure {
  TrigPolynomial h, dh;
  double curvature = 0.0;

  explicit Enclosure(const TrigPolynomial& poly) : h(poly) {
    std::vector<FourierTerm> d;
    for (const auto& t : poly.terms()) {
      const double k = 2.0 * std::numbers::pi * t.n;
      d.push_back({t.n, cplx(0.0, k) * t.c});
      curvature += k * k * std::abs(t.c);
    }
    dh = TrigPolynomial::from_terms(d);
  }

  std::pair<double, double> range(double c, double r) const {
    const double spread = std::abs(dh(c)) * r + 0.5 * curvature * r * r;
    const double v = std::abs(h(c));
    return {std::max(0.0, v - spread), v + spread};
  }
};

// {x : |a(x)| < t |b(x)|}, certified interval by interval.
MeasureBracket pencil_measure(const TrigPolynomial& a, const TrigPolynomial& b, double t, int depth) {
  if (depth < 1 || depth > kMaxSublevelDepth)
    throw Error(ErrorKind::InvalidArgument, "depth must lie in [1, 24]");
  const Enclosure ea(a), eb(b);
  const auto classify = [&](double lo, double width) {
    const double r = 0.5 * width, c = lo + r;
    const auto [a_lo, a_hi] = ea.range(c, r);
    const auto [b_lo, b_hi] = eb.range(c, r);
    if (a_hi < t * b_lo) return 1;
    if (a_lo >= t * b_hi) return 0;
    return -1;
  };
  return bisect(classify, depth, std::min(depth, 6));
}

}  // namespace

MeasureBracket measure_set(const Membership& inside, int depth, int min_level) {
  if (depth < 1 || depth > kMaxSublevelDepth)
    throw Error(ErrorKind::InvalidArgument, "depth must lie in [1, 24]");
  return bisect([&](double lo, double width) { return classify(inside, lo, width); }, depth, min_level);
}

MeasureBracket sublevel_measure(const TrigPolynomial& h, double threshold, int depth) {
  if (!(threshold > 0.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be > 0");
  return pencil_measure(h, TrigPolynomial::constant(1.0), threshold, depth);
}

MeasureBracket sublevel_measure(const std::function<double(double)>& fn, double threshold, int depth) {
  if (!(threshold > 0.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be > 0");
  return measure_set([&](double x) { return std::abs(fn(x)) < threshold; }, depth);
}

MeasureBracket normalized_linear_measure(const MeromorphicPotential& p, double E, double eps, int depth) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be > 0");
  return pencil_measure(p.linear_pencil(E), TrigPolynomial::constant(1.0), eps * std::hypot(1.0, E), depth);
}

MeasureBracket potential_measure(const MeromorphicPotential& p, double E, double eps, int depth) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be > 0");
  return pencil_measure(p.linear_pencil(E), p.f(), eps, depth);
}

ExponentFit fit_exponent(std::vector<ExponentSample> samples) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (const auto& s : samples) {
    const double m = s.bracket.midpoint();
    if (!(m > 0.0) || !(s.eps > 0.0)) continue;
    const double x = std::log(s.eps), y = std::log(m);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  if (n < 2) throw Error(ErrorKind::InsufficientData, "need two samples with positive measure");
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cxy = sxy - sx * sy / n;
  ExponentFit fit;
  fit.c = cxy / vx;
  fit.log_K = (sy - fit.c * sx) / n;
  fit.r2 = vy > 0.0 ? std::clamp(cxy * cxy / (vx * vy), 0.0, 1.0) : 1.0;
  fit.samples = std::move(samples);
  return fit;
}

ExponentFit lojasiewicz_fit(const MeromorphicPotential& p, double E, std::span<const double> eps_list,
                            int depth) {
  if (eps_list.size() < 4) throw Error(ErrorKind::InvalidArgument, "eps_list needs at least 4 entries");
  const auto [lo, hi] = std::minmax_element(eps_list.begin(), eps_list.end());
  if (!(*lo > 0.0) || *hi / *lo < 1e3 * (1.0 - 1e-12))
    throw Error(ErrorKind::InvalidArgument, "eps_list must be positive and span at least 3 decades");
  std::vector<ExponentSample> samples;
  samples.reserve(eps_list.size());
  for (double eps : eps_list) samples.push_back({eps, potential_measure(p, E, eps, depth)});
  return fit_exponent(std::move(samples));
}

std::vector<double> default_eps_list() {
  std::vector<double> out;
  for (int k = 0; k <= 20; ++k) out.push_back(std::pow(10.0, -5.0 + 0.2 * k));
  return out;
}

}  // namespace qplab
