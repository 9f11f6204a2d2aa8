#include "qplab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qplab/error.hpp"
#include "qplab/parallel.hpp"

namespace qplab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double energy_norm(double E) { return std::hypot(1.0, E); }

// log(e^a + e^b) without overflow.
double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

OperatorSpec::OperatorSpec(MeromorphicPotential potential_, ToeplitzKernel kernel_, double eps_, Frequency freq_,
                           double f_min_)
    : potential(std::move(potential_)), kernel(std::move(kernel_)), eps(eps_), freq(freq_), f_min(f_min_) {
  if (!(eps >= 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be >= 0");
  if (!(eps < 1.0)) throw Error(ErrorKind::InvalidArgument, "eps must be < 1");
  if (!(f_min > 0.0)) throw Error(ErrorKind::InvalidArgument, "f_min must be > 0");
}

IndexWindow::IndexWindow(std::int64_t lo_, std::int64_t hi_) : lo(lo_), hi(hi_) {
  if (lo > hi) throw Error(ErrorKind::InvalidArgument, "window needs lo <= hi");
}

OrbitSamples sample_orbit(const OperatorSpec& spec, TorusPoint x, IndexWindow w) {
  OrbitSamples s{w, {}, {}};
  const auto n = static_cast<std::size_t>(w.size());
  s.g.resize(n);
  s.f.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xn = orbit_point(x.value(), spec.omega(), w.lo + static_cast<std::int64_t>(i));
    s.g[i] = spec.potential.g()(xn);
    s.f[i] = spec.potential.f()(xn);
  }
  return s;
}

Matrix bounded_factor(const OperatorSpec& spec, const OrbitSamples& s, IndexWindow sub, double E) {
  if (sub.lo < s.w.lo || sub.hi > s.w.hi)
    throw Error(ErrorKind::InvalidArgument, "sub-window outside the sampled window");
  const Eigen::Index N = sub.size();
  const auto off = static_cast<std::size_t>(sub.lo - s.w.lo);
  const double scale = 1.0 / energy_norm(E);
  Matrix B(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double fi = s.f[off + static_cast<std::size_t>(i)];
    const double row = spec.eps * fi * scale;
    for (Eigen::Index j = 0; j < N; ++j) B(i, j) = row * spec.kernel.at(static_cast<long>(i - j));
    B(i, i) = (s.g[off + static_cast<std::size_t>(i)] - E * fi) * scale;
  }
  return B;
}

Matrix bounded_factor(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E) {
  return bounded_factor(spec, sample_orbit(spec, x, w), w, E);
}

Vector inverse_scaling(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E) {
  const OrbitSamples s = sample_orbit(spec, x, w);
  Vector out(w.size());
  const double scale = 1.0 / energy_norm(E);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = s.f[static_cast<std::size_t>(i)] * scale;
  return out;
}

Matrix build_window(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E) {
  const OrbitSamples s = sample_orbit(spec, x, w);
  for (std::size_t i = 0; i < s.f.size(); ++i) {
    if (std::abs(s.f[i]) < spec.f_min) {
      const auto n = w.lo + static_cast<std::int64_t>(i);
      throw PoleProximityError(orbit_point(x.value(), spec.omega(), n), std::abs(s.f[i]), static_cast<long>(n));
    }
  }
  const Eigen::Index N = w.size();
  Matrix H(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) H(i, j) = spec.eps * spec.kernel.at(static_cast<long>(i - j));
    H(i, i) = s.g[static_cast<std::size_t>(i)] / s.f[static_cast<std::size_t>(i)] - E;
  }
  return H;
}

FactorPair factorize(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E) {
  const OrbitSamples s = sample_orbit(spec, x, w);
  for (std::size_t i = 0; i < s.f.size(); ++i) {
    if (std::abs(s.f[i]) < spec.f_min) {
      const auto n = w.lo + static_cast<std::int64_t>(i);
      throw PoleProximityError(orbit_point(x.value(), spec.omega(), n), std::abs(s.f[i]), static_cast<long>(n));
    }
  }
  FactorPair fp;
  fp.E = E;
  fp.x = x;
  fp.B = bounded_factor(spec, s, w, E);
  fp.F_diag.resize(w.size());
  const double norm = energy_norm(E);
  for (Eigen::Index i = 0; i < fp.F_diag.size(); ++i) fp.F_diag(i) = norm / s.f[static_cast<std::size_t>(i)];
  return fp;
}

EntryBounds entry_bounds(const OperatorSpec& spec) {
  const double g = spec.potential.g().coeff_l1();
  const double f = spec.potential.f().coeff_l1();
  return {g + f, spec.eps * f, spec.kernel.rho()};
}

DecayFit decay_fit(const Matrix& G, double frac) {
  if (!(frac > 0.0 && frac < 1.0)) throw Error(ErrorKind::InvalidArgument, "frac must lie in (0,1)");
  const Eigen::Index N = G.rows();
  const double min_dist = frac * static_cast<double>(N);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::int64_t n = 0;
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      const auto d = static_cast<double>(std::abs(i - j));
      const double a = std::abs(G(i, j));
      if (d < min_dist || !(a > kPivotUnderflow) || !std::isfinite(a)) continue;
      const double y = std::log(a);
      sx += d;
      sy += y;
      sxx += d * d;
      sxy += d * y;
      syy += y * y;
      ++n;
    }
  }
  if (n < 10) throw Error(ErrorKind::InsufficientData, std::to_string(n) + " usable pairs (< 10)");
  const double nn = static_cast<double>(n);
  const double vx = sxx - sx * sx / nn;
  const double vy = syy - sy * sy / nn;
  const double cxy = sxy - sx * sy / nn;
  if (!(vx > 0.0)) throw Error(ErrorKind::InsufficientData, "all usable pairs at one distance");
  const double slope = cxy / vx;
  DecayFit fit;
  fit.c_eff = -slope;
  fit.offset = (sy - slope * sx) / nn;
  fit.r2 = vy > 0.0 ? std::clamp(cxy * cxy / (vx * vy), 0.0, 1.0) : 1.0;
  fit.pairs = n;
  return fit;
}

GreenResult green(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E) {
  const OrbitSamples s = sample_orbit(spec, x, w);
  const Matrix B = bounded_factor(spec, s, w, E);
  const LogLU lu(B);
  const LogDet ld = lu.logdet();
  if (ld.sign == 0) throw Error(ErrorKind::SingularWindow, "B is singular at E=" + std::to_string(E));
  GreenResult r;
  r.logdet_B = ld.logabs;
  r.sign_B = ld.sign;
  r.hadamard_B = hadamard_log_bound(B);
  r.G = lu.inverse();
  const double scale = 1.0 / energy_norm(E);
  for (Eigen::Index j = 0; j < r.G.cols(); ++j) r.G.col(j) *= s.f[static_cast<std::size_t>(j)] * scale;
  r.max_entry = r.G.cwiseAbs().maxCoeff();
  try {
    r.decay = decay_fit(r.G, 0.1);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
  }
  return r;
}

double cramer_check(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E, std::int64_t n,
                    std::int64_t np) {
  const std::int64_t N = w.size();
  if (N > 10) throw Error(ErrorKind::InvalidArgument, "cramer_check is limited to N <= 10");
  if (n < 0 || n >= N || np < 0 || np >= N) throw Error(ErrorKind::InvalidArgument, "index outside window");
  const Matrix B = bounded_factor(spec, x, w, E);
  const LogLU lu(B);
  if (lu.singular()) throw Error(ErrorKind::SingularWindow, "B is singular");
  const double direct = std::abs(lu.inverse()(n, np));
  // (B^{-1})_{n,n'} = cofactor_{n',n} / det B
  const LogDet minor = logdet(delete_row_col(B, np, n));
  const double ratio = minor.sign == 0 ? 0.0 : std::exp(minor.logabs - lu.logdet().logabs);
  const double scale = std::max(direct, ratio);
  return scale == 0.0 ? 0.0 : std::abs(direct - ratio) / scale;
}

double path_expansion_log_ceiling(const Matrix& B, double rho, std::int64_t n, std::int64_t np) {
  const Eigen::Index N = B.rows();
  double coupling = 0.0;
  double log_rows = 0.0;
  for (Eigen::Index a = 0; a < N; ++a) {
    for (Eigen::Index b = 0; b < N; ++b)
      if (a != b) coupling = std::max(coupling, std::abs(B(a, b)) * std::exp(rho * std::abs(a - b)));
    log_rows += std::log(std::max(1.0, B.row(a).norm()));
  }
  const double q = std::exp(-rho) * (1.0 + 2.0 * coupling);
  const LogDet ld = logdet(B);
  if (!(q < 1.0) || ld.sign == 0) return std::numeric_limits<double>::infinity();
  const auto d = static_cast<double>(std::abs(n - np));
  return log_rows + d * std::log(q) - std::log1p(-q) - ld.logabs;
}

double log_pencil_integral(const MeromorphicPotential& p, double E, int cells) {
  if (cells < 64) throw Error(ErrorKind::InvalidArgument, "need at least 64 quadrature cells");
  const TrigPolynomial pencil = p.linear_pencil(E);
  const double norm = energy_norm(E);
  if (pencil.is_zero()) return kNegInf;
  const auto zeros = zeros_on_torus(pencil, 1e-10);
  const double h = 1.0 / cells;
  const double near = std::ldexp(1.0, -6) + h;
  auto integrand = [&](double x) { return std::log(std::abs(pencil(x)) / norm); };
  double acc = 0.0;
  for (int k = 0; k < cells; ++k) {
    const double mid = (k + 0.5) * h;
    const bool refine = std::any_of(zeros.begin(), zeros.end(),
                                    [&](const TorusZero& z) { return torus_dist(mid - z.x.value()) < near; });
    if (!refine) {
      acc += integrand(mid) * h;
      continue;
    }
    for (int s = 0; s < 8; ++s) acc += integrand(k * h + (s + 0.5) * h / 8.0) * (h / 8.0);
  }
  return acc;
}

AvgLogdetReport avg_logdet_check(const OperatorSpec& spec, double E, std::int64_t N, std::int64_t x_grid) {
  if (x_grid < 256) throw Error(ErrorKind::InvalidArgument, "x_grid must be >= 256");
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  const auto per_point = parallel::map_indices<double>(static_cast<std::size_t>(x_grid), [&](std::size_t j) {
    const TorusPoint x((static_cast<double>(j) + 0.5) / static_cast<double>(x_grid));
    return logdet(bounded_factor(spec, x, IndexWindow::first(N), E)).logabs / static_cast<double>(N);
  });
  AvgLogdetReport r;
  double acc = 0.0;
  std::int64_t used = 0;
  for (double v : per_point) {
    if (v == kNegInf) {
      ++r.singular_points;
      continue;
    }
    acc += v;
    ++used;
  }
  r.lhs = used > 0 ? acc / static_cast<double>(used) : kNegInf;
  r.rhs = log_pencil_integral(spec.potential, E);
  r.margin = r.lhs - r.rhs;
  return r;
}

double ldt_floor_constant(const MeromorphicPotential& p) {
  double worst = std::numeric_limits<double>::infinity();
  constexpr int kEnergies = 65;
  for (int k = 0; k < kEnergies; ++k) {
    const double theta = std::numbers::pi * ((k + 0.5) / kEnergies - 0.5);
    worst = std::min(worst, log_pencil_integral(p, std::tan(theta), 2048));
  }
  const double c_fg = std::max(0.0, -worst);
  return 10.0 * (c_fg + 1.0) + 1.0;
}

std::vector<DeviationReport> ldt_scan(const OperatorSpec& spec, double E, std::int64_t N,
                                      std::span<const std::int64_t> Ms, std::int64_t x_grid, double threshold,
                                      double c_tilde) {
  if (Ms.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one M");
  if (N < 1 || x_grid < 1) throw Error(ErrorKind::InvalidArgument, "N and x_grid must be >= 1");
  if (!(threshold > 0.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be > 0");
  const std::int64_t M_max = *std::max_element(Ms.begin(), Ms.end());
  if (*std::min_element(Ms.begin(), Ms.end()) < 1) throw Error(ErrorKind::InvalidArgument, "M must be >= 1");
  if (!(c_tilde > 0.0)) c_tilde = ldt_floor_constant(spec.potential);
  const double log_floor = -static_cast<double>(N) * std::log(c_tilde);
  const auto shifts = static_cast<std::size_t>(2 * M_max - 1);

  // u(x_j + m omega) for m in (-M_max, M_max), row j.
  std::vector<std::vector<double>> u(static_cast<std::size_t>(x_grid));
  parallel::for_each_index(u.size(), [&](std::size_t j) {
    const TorusPoint x((static_cast<double>(j) + 0.5) / static_cast<double>(x_grid));
    const OrbitSamples s = sample_orbit(spec, x, IndexWindow(-(M_max - 1), M_max - 1 + N - 1));
    auto& row = u[j];
    row.resize(shifts);
    for (std::size_t k = 0; k < shifts; ++k) {
      const std::int64_t m = static_cast<std::int64_t>(k) - (M_max - 1);
      const LogDet ld = logdet(bounded_factor(spec, s, IndexWindow(m, m + N - 1), E));
      row[k] = log_add_exp(ld.logabs, log_floor) / static_cast<double>(N);
    }
  });

  double mean = 0.0;
  for (const auto& row : u) mean += row[static_cast<std::size_t>(M_max - 1)];
  mean /= static_cast<double>(x_grid);

  std::vector<DeviationReport> out;
  for (std::int64_t M : Ms) {
    DeviationReport r;
    r.M = M;
    r.threshold = threshold;
    r.mean = mean;
    r.averages.resize(u.size());
    std::int64_t bad = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      const std::span<const double> window(u[j].data() + (M_max - M), static_cast<std::size_t>(2 * M - 1));
      r.averages[j] = weighted_average(window, M);
      if (std::abs(r.averages[j] - mean) > threshold) ++bad;
    }
    r.bad_fraction = static_cast<double>(bad) / static_cast<double>(x_grid);
    out.push_back(std::move(r));
  }
  return out;
}

DeviationReport ldt_scan(const OperatorSpec& spec, double E, std::int64_t N, std::int64_t M, std::int64_t x_grid,
                         double threshold, double c_tilde) {
  const std::int64_t Ms[] = {M};
  return std::move(ldt_scan(spec, E, N, Ms, x_grid, threshold, c_tilde).front());
}

ShiftResult good_shift(const OperatorSpec& spec, TorusPoint x, double E, std::int64_t N) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  const auto root = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(N))));
  const std::int64_t reach = root - 1;  // |m| < floor(sqrt N)
  ShiftResult r;
  const OrbitSamples s = sample_orbit(spec, x, IndexWindow(-reach, reach + N - 1));
  for (std::int64_t m = -reach; m <= reach; ++m) {
    r.shifts.push_back(m);
    r.logdets.push_back(logdet(bounded_factor(spec, s, IndexWindow(m, m + N - 1), E)).logabs);
  }
  std::size_t best = r.shifts.size();
  for (std::size_t k = 0; k < r.shifts.size(); ++k) {
    if (r.logdets[k] == kNegInf) continue;
    if (best == r.shifts.size()) {
      best = k;
      continue;
    }
    const double a = r.logdets[k], b = r.logdets[best];
    const std::int64_t ma = r.shifts[k], mb = r.shifts[best];
    const bool better = a > b || (a == b && (std::abs(ma) < std::abs(mb) || (std::abs(ma) == std::abs(mb) && ma > mb)));
    if (better) best = k;
  }
  if (best == r.shifts.size()) throw Error(ErrorKind::AllSingular, "every shift is numerically singular");
  r.m = r.shifts[best];
  const TorusPoint shifted(orbit_point(x.value(), spec.omega(), r.m));
  r.green = green(spec, shifted, IndexWindow::first(N), E);
  return r;
}

}  // namespace qplab
