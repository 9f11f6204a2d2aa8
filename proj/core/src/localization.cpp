#include "qplab/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "qplab/error.hpp"
#include "qplab/parallel.hpp"

namespace qplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_abs(double v) { return v == 0.0 ? -kInf : std::log(std::abs(v)); }

std::string pair_text(std::int64_t a, std::int64_t b) {
  return "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

// Smallest log gap to e^{-c0 (|d| - slack)} over all entries; positive when
// the template holds strictly everywhere. first_bad receives the first
// offending pair (row-major), if any.
double template_margin(const Matrix& G, double c0, double slack, std::pair<Eigen::Index, Eigen::Index>* first_bad) {
  double worst = kInf;
  bool found = false;
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
      const double d = static_cast<double>(std::abs(i - j));
      const double margin = -c0 * (d - slack) - log_abs(G(i, j));
      worst = std::min(worst, margin);
      if (!(margin > 0.0) && !found && first_bad) {
        *first_bad = {i, j};
        found = true;
      }
    }
  }
  return worst;
}

std::vector<std::int64_t> shift_order(std::int64_t N) {
  const auto reach = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(N)))) - 1;
  std::vector<std::int64_t> out{0};
  for (std::int64_t m = 1; m <= reach; ++m) {
    out.push_back(m);
    out.push_back(-m);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- paving

std::int64_t covering_child(const Paving& p, std::int64_t k) {
  const std::int64_t q = p.M / 4;
  const std::int64_t a = std::max(p.parent.lo, k - q);
  const std::int64_t b = std::min(p.parent.hi, k + q);
  for (std::size_t i = 0; i < p.children.size(); ++i)
    if (p.children[i].contains(a) && p.children[i].contains(b)) return static_cast<std::int64_t>(i);
  return -1;
}

bool covers_with_margin(const Paving& p) {
  for (std::int64_t k = p.parent.lo; k <= p.parent.hi; ++k)
    if (covering_child(p, k) < 0) return false;
  return true;
}

Paving pave(IndexWindow parent, std::int64_t M) {
  const std::int64_t N = parent.size();
  Paving p{parent, {}, M};
  if (M == N) {
    p.children.push_back(parent);
    return p;
  }
  if (M < 8 || 2 * M > N)
    throw Error(ErrorKind::BadSizes, "need 8 <= M <= N/2 (N=" + std::to_string(N) + ", M=" + std::to_string(M) + ")");
  const std::int64_t stride = M / 2;
  for (std::int64_t lo = parent.lo; lo + M - 1 < parent.hi; lo += stride) p.children.emplace_back(lo, lo + M - 1);
  const IndexWindow last(parent.hi - M + 1, parent.hi);
  if (p.children.empty() || !(p.children.back() == last)) p.children.push_back(last);
  if (!covers_with_margin(p))
    throw Error(ErrorKind::BadSizes, "stride M/2 does not give the quarter-margin cover for N=" + std::to_string(N) +
                                         ", M=" + std::to_string(M));
  return p;
}

// ---------------------------------------------------------------- patching

double minimal_slack(const OperatorSpec& spec, TorusPoint x, double E, const Paving& paving, double c0,
                     double margin) {
  if (!(c0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "c0 must be > 0");
  const auto per_child = parallel::map_indices<double>(paving.children.size(), [&](std::size_t i) {
    const Matrix G = green(spec, x, paving.children[i], E).G;
    double s = -kInf;
    for (Eigen::Index a = 0; a < G.rows(); ++a)
      for (Eigen::Index b = 0; b < G.cols(); ++b)
        s = std::max(s, static_cast<double>(std::abs(a - b)) + log_abs(G(a, b)) / c0);
    return s;
  });
  return *std::max_element(per_child.begin(), per_child.end()) + margin;
}

PatchReport patch_check(const OperatorSpec& spec, TorusPoint x, double E, const Paving& paving, double c0,
                        double slack) {
  if (paving.children.empty()) throw Error(ErrorKind::InvalidArgument, "paving has no children");
  PatchReport r;
  r.c0 = c0;
  r.slack = slack;

  // Hypotheses on the children.
  const auto child_G = parallel::map_indices<Matrix>(paving.children.size(), [&](std::size_t i) {
    return green(spec, x, paving.children[i], E).G;
  });
  r.child_worst_margin = kInf;
  for (std::size_t i = 0; i < child_G.size(); ++i) {
    std::pair<Eigen::Index, Eigen::Index> bad{-1, -1};
    const double m = template_margin(child_G[i], c0, slack, &bad);
    if (!(m > 0.0)) {
      const auto lo = paving.children[i].lo;
      throw Error(ErrorKind::HypothesisFailed, "child " + std::to_string(i) + " [" + std::to_string(lo) + ", " +
                                                   std::to_string(paving.children[i].hi) + "] fails at pair " +
                                                   pair_text(lo + bad.first, lo + bad.second) +
                                                   " by " + std::to_string(-m) + " in log");
    }
    r.child_worst_margin = std::min(r.child_worst_margin, m);
    ++r.children_checked;
  }

  // Conclusions on the parent.
  const IndexWindow I = paving.parent;
  const GreenResult parent = green(spec, x, I, E);
  const Matrix& G = parent.G;
  const auto N = static_cast<double>(I.size());
  r.parent_max_entry = parent.max_entry;
  r.max_entry_ceiling = 2.0 * std::exp(c0 * slack);
  r.max_entry_ok = std::log(r.parent_max_entry) <= std::log(2.0) + c0 * slack;
  r.decay_worst_margin = kInf;
  for (Eigen::Index a = 0; a < G.rows(); ++a) {
    for (Eigen::Index b = 0; b < G.cols(); ++b) {
      const double d = static_cast<double>(std::abs(a - b));
      if (!(d > N / 10.0)) continue;
      ++r.decay_pairs;
      const double m = -0.5 * c0 * d - log_abs(G(a, b));
      r.decay_worst_margin = std::min(r.decay_worst_margin, m);
      if (!(m > 0.0)) ++r.decay_violations;
    }
  }
  r.decay_ok = r.decay_violations == 0;

  // Resolvent identity on the split around the middle child.
  r.block_child = static_cast<std::int64_t>(paving.children.size() / 2);
  const IndexWindow mid = paving.children[static_cast<std::size_t>(r.block_child)];
  std::vector<IndexWindow> blocks;
  if (mid.lo > I.lo) blocks.emplace_back(I.lo, mid.lo - 1);
  blocks.push_back(mid);
  if (mid.hi < I.hi) blocks.emplace_back(mid.hi + 1, I.hi);
  const Eigen::Index n = G.rows();
  Matrix G_blk = Matrix::Zero(n, n);
  std::vector<Eigen::Index> block_of(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const Eigen::Index off = blocks[k].lo - I.lo, len = blocks[k].size();
    G_blk.block(off, off, len, len) = green(spec, x, blocks[k], E).G;
    for (Eigen::Index i = off; i < off + len; ++i) block_of[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(k);
  }
  Matrix dH = Matrix::Zero(n, n);  // H_blk - H_I: minus the couplings across blocks
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      if (block_of[static_cast<std::size_t>(a)] != block_of[static_cast<std::size_t>(b)])
        dH(a, b) = -spec.eps * spec.kernel.at(static_cast<long>(a - b));
  const Matrix residual = G - G_blk - G_blk * dH * G;
  const Matrix scale = G.cwiseAbs() + G_blk.cwiseAbs() + G_blk.cwiseAbs() * dH.cwiseAbs() * G.cwiseAbs();
  r.resolvent_residual = residual.cwiseAbs().maxCoeff() / scale.maxCoeff();
  r.resolvent_ok = r.resolvent_residual <= kResolventTolerance;
  return r;
}

PatchPipeline patch_pipeline(const OperatorSpec& spec, TorusPoint x, double E, std::int64_t N, std::int64_t M) {
  PatchPipeline out;
  const ShiftResult shift = good_shift(spec, x, E, N);
  out.shift = shift.m;
  out.phase = TorusPoint(orbit_point(x.value(), spec.omega(), shift.m));
  out.paving = pave(IndexWindow::first(N), M);
  double c0 = kInf;
  for (const auto& child : out.paving.children) {
    const GreenResult g = green(spec, out.phase, child, E);
    if (!g.decay)
      throw Error(ErrorKind::HypothesisFailed,
                  "child [" + std::to_string(child.lo) + ", " + std::to_string(child.hi) + "] has no decay fit");
    out.child_fits.push_back(*g.decay);
    c0 = std::min(c0, g.decay->c_eff);
  }
  if (!(c0 > 0.0)) throw Error(ErrorKind::HypothesisFailed, "smallest child decay rate is not positive");
  const double slack = minimal_slack(spec, out.phase, E, out.paving, c0);
  out.report = patch_check(spec, out.phase, E, out.paving, c0, slack);
  return out;
}

// ---------------------------------------------------------------- bad sets

std::int64_t BadSet::count() const noexcept { return std::count(flagged.begin(), flagged.end(), true); }

BadSet bad_set(const OperatorSpec& spec, double E, std::int64_t N, std::int64_t grid, double c0, double slack) {
  if (grid < 512) throw Error(ErrorKind::InvalidArgument, "grid must be >= 512");
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  const auto order = shift_order(N);
  BadSet out;
  out.E = E;
  out.N = N;
  out.grid = grid;
  out.flagged.assign(static_cast<std::size_t>(grid), true);
  out.shift.assign(static_cast<std::size_t>(grid), 0);
  // vector<bool> is not safe for concurrent writes; collect bytes first.
  std::vector<char> good(static_cast<std::size_t>(grid), 0);
  parallel::for_each_index(good.size(), [&](std::size_t j) {
    const TorusPoint x((static_cast<double>(j) + 0.5) / static_cast<double>(grid));
    for (std::int64_t m : order) {
      try {
        const Matrix G = green(spec, x, IndexWindow(m, m + N - 1), E).G;
        if (template_margin(G, c0, slack, nullptr) > 0.0) {
          good[j] = 1;
          out.shift[j] = m;
          return;
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularWindow) throw;
      }
    }
  });
  for (std::size_t j = 0; j < good.size(); ++j) out.flagged[j] = good[j] == 0;
  out.fraction = static_cast<double>(out.count()) / static_cast<double>(grid);
  return out;
}

std::optional<BadSetExponent> fit_bad_set_exponent(const std::vector<BadSet>& ladder) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::int64_t n = 0;
  for (const auto& b : ladder) {
    if (!(b.fraction > 0.0 && b.fraction < 1.0)) continue;
    const double x = std::log(static_cast<double>(b.N));
    const double y = std::log(-std::log(b.fraction));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double nn = static_cast<double>(n);
  const double vx = sxx - sx * sx / nn;
  if (!(vx > 0.0)) return std::nullopt;
  BadSetExponent e;
  e.sigma = (sxy - sx * sy / nn) / vx;
  e.log_c = (sy - e.sigma * sx) / nn;
  e.points = n;
  return e;
}

OrbitCount orbit_count(const BadSet& bad, TorusPoint x0, const Frequency& freq, std::int64_t N1, double delta) {
  if (N1 < 1) throw Error(ErrorKind::InvalidArgument, "N1 must be >= 1");
  if (bad.grid < 1 || static_cast<std::int64_t>(bad.flagged.size()) != bad.grid)
    throw Error(ErrorKind::InvalidArgument, "bad set is not materialized");
  OrbitCount c;
  c.N1 = N1;
  c.delta = delta;
  const auto grid = static_cast<double>(bad.grid);
  for (std::int64_t k = 1; k <= N1; ++k) {
    const double x = orbit_point(x0.value(), freq.omega(), k);
    const auto cell = std::min<std::int64_t>(bad.grid - 1, static_cast<std::int64_t>(std::floor(x * grid)));
    if (bad.flagged[static_cast<std::size_t>(cell)]) ++c.count;
  }
  c.reference = std::pow(static_cast<double>(N1), 1.0 - delta);
  c.ratio = static_cast<double>(c.count) / c.reference;
  c.degenerate = c.count >= N1;
  return c;
}

// ---------------------------------------------------------------- eigenvectors

namespace {

struct TailFit {
  double c;
  double r2;
};

TailFit fit_tail(const std::vector<double>& xi, std::int64_t center_pos, double min_dist) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const auto d = static_cast<double>(std::abs(static_cast<std::int64_t>(i) - center_pos));
    const double a = std::abs(xi[i]);
    if (d < min_dist || !(a > kPivotUnderflow)) continue;
    const double y = std::log(a);
    sx += d;
    sy += y;
    sxx += d * d;
    sxy += d * y;
    syy += y * y;
    ++n;
  }
  if (n < 3) return {kInf, 1.0};
  const double nn = static_cast<double>(n);
  const double vx = sxx - sx * sx / nn;
  const double vy = syy - sy * sy / nn;
  const double cxy = sxy - sx * sy / nn;
  if (!(vx > 0.0)) return {kInf, 1.0};
  return {-cxy / vx, vy > 0.0 ? std::clamp(cxy * cxy / (vx * vy), 0.0, 1.0) : 1.0};
}

double residual_of(const Matrix& H, double E, const Vector& xi) {
  const Vector r = H * xi - E * xi;
  return r.cwiseAbs().maxCoeff() / xi.norm();
}

}  // namespace

EigenReport eigen_decay(const OperatorSpec& spec, TorusPoint x0, std::int64_t N,
                        std::optional<std::pair<double, double>> energy_window) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  const IndexWindow W(-N, N);
  Matrix H = build_window(spec, x0, W, 0.0);
  H = 0.5 * (H + H.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigenFailure, "symmetric eigensolver did not converge");
  const Matrix& V = es.eigenvectors();
  const Vector& lambda = es.eigenvalues();

  EigenReport rep;
  rep.N = N;
  const Matrix gram = V.transpose() * V - Matrix::Identity(V.cols(), V.cols());
  rep.max_overlap = gram.cwiseAbs().maxCoeff();

  std::vector<Eigen::Index> picked;
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    if (!energy_window || (lambda(k) >= energy_window->first && lambda(k) <= energy_window->second))
      picked.push_back(k);

  const OrbitSamples samples = sample_orbit(spec, x0, W);
  const double edge = static_cast<double>(N) / 10.0;
  rep.pairs = parallel::map_indices<EigenPair>(picked.size(), [&](std::size_t t) {
    const Eigen::Index k = picked[t];
    const double E = lambda(k);
    Eigen::Index c = 0;
    for (Eigen::Index i = 1; i < V.rows(); ++i)
      if (std::abs(V(i, k)) > std::abs(V(c, k))) c = i;

    Vector raw = V.col(k) / V(c, k);
    Vector xi = raw;
    if (V.rows() > 1) {
      // Pin xi_c = 1 and solve the remaining rows of B xi = 0.
      const Matrix B = bounded_factor(spec, samples, W, E);
      const LogLU lu(delete_row_col(B, c, c));
      if (!lu.singular()) {
        Vector rhs(V.rows() - 1);
        for (Eigen::Index i = 0, o = 0; i < V.rows(); ++i)
          if (i != c) rhs(o++) = -B(i, c);
        const Vector rest = lu.solve(rhs);
        for (Eigen::Index i = 0, o = 0; i < V.rows(); ++i) xi(i) = i == c ? 1.0 : rest(o++);
      }
    }
    double res = residual_of(H, E, xi);
    const double raw_res = residual_of(H, E, raw);
    if (!(res <= kEigenResidualTolerance) && raw_res < res) {
      xi = raw;
      res = raw_res;
    }
    if (!(res <= kEigenResidualTolerance))
      throw Error(ErrorKind::EigenFailure, "residual " + std::to_string(res) + " at E=" + std::to_string(E));

    EigenPair p;
    p.E = E;
    p.xi.assign(xi.data(), xi.data() + xi.size());
    p.residual = res;
    p.center = W.lo + c;
    const TailFit fit = fit_tail(p.xi, c, edge);
    p.decay_c = fit.c;
    p.decay_r2 = fit.r2;
    p.interior = static_cast<double>(p.center - W.lo) >= edge && static_cast<double>(W.hi - p.center) >= edge;
    return p;
  });
  for (const auto& p : rep.pairs) rep.max_residual = std::max(rep.max_residual, p.residual);
  return rep;
}

double localized_fraction(const EigenReport& r, double r2_min) {
  std::int64_t interior = 0, good = 0;
  for (const auto& p : r.pairs) {
    if (!p.interior) continue;
    ++interior;
    if (p.decay_r2 > r2_min && p.decay_c > 0.0) ++good;
  }
  return interior == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(interior);
}

std::vector<NestedSpectrum> nested_spectra(const OperatorSpec& spec, TorusPoint x0, std::int64_t j_max,
                                           std::int64_t stride) {
  if (stride < 1 || j_max < stride) throw Error(ErrorKind::InvalidArgument, "need 1 <= stride <= j_max");
  const auto count = static_cast<std::size_t>(j_max / stride);
  return parallel::map_indices<NestedSpectrum>(count, [&](std::size_t i) {
    const std::int64_t j = static_cast<std::int64_t>(i + 1) * stride;
    Matrix H = build_window(spec, x0, IndexWindow(-j, j), 0.0);
    H = 0.5 * (H + H.transpose());
    const Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::EigenFailure, "eigensolver failed at j=" + std::to_string(j));
    NestedSpectrum s;
    s.j = j;
    s.energies.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return s;
  });
}

std::int64_t interlacing_violations(const std::vector<NestedSpectrum>& nested) {
  std::int64_t bad = 0;
  for (std::size_t s = 1; s < nested.size(); ++s) {
    const auto& in = nested[s - 1].energies;
    const auto& out = nested[s].energies;
    const auto grow = static_cast<std::size_t>(2 * (nested[s].j - nested[s - 1].j));
    double scale = 1.0;
    for (double e : out) scale = std::max(scale, std::abs(e));
    const double tol = 1e-9 * scale;
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (out[k] > in[k] + tol) ++bad;
      if (k + grow < out.size() && in[k] > out[k + grow] + tol) ++bad;
    }
  }
  return bad;
}

}  // namespace qplab
