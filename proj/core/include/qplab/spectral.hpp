#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qplab/functions.hpp"
#include "qplab/linalg.hpp"
#include "qplab/torus.hpp"

namespace qplab {

/// H(x) = v(x + n omega) delta_{nn'} + eps S_phi on l^2(Z).
struct OperatorSpec {
  MeromorphicPotential potential;
  ToeplitzKernel kernel;
  double eps;
  Frequency freq;
  double f_min = kDefaultFMin;

  /// Throws InvalidArgument unless 0 <= eps < 1 and f_min > 0.
  OperatorSpec(MeromorphicPotential potential, ToeplitzKernel kernel, double eps, Frequency freq,
               double f_min = kDefaultFMin);

  double omega() const noexcept { return freq.omega(); }
};

/// Inclusive integer interval [lo, hi].
struct IndexWindow {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  IndexWindow() = default;
  /// Throws InvalidArgument if lo > hi.
  IndexWindow(std::int64_t lo, std::int64_t hi);
  /// [0, N)
  static IndexWindow first(std::int64_t N) { return {0, N - 1}; }

  std::int64_t size() const noexcept { return hi - lo + 1; }
  bool contains(std::int64_t n) const noexcept { return n >= lo && n <= hi; }
  friend bool operator==(const IndexWindow&, const IndexWindow&) = default;
};

/// Dense H_w(x) - E. Throws PoleProximityError (index = offending n) when an
/// orbit point sits within f_min of a zero of f.
Matrix build_window(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E);

/// H_w - E = F B with F = diag(sqrt(1+E^2) / f(x + n omega)) and B bounded.
struct FactorPair {
  Vector F_diag;
  Matrix B;
  double E = 0.0;
  TorusPoint x;
};

/// Throws PoleProximityError like build_window (F is unbounded at poles).
FactorPair factorize(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E);

/// The bounded factor B alone. Defined for every x, poles included:
///   B(n,n)  = (g - E f)(x + n omega) / sqrt(1+E^2)
///   B(n,n') = eps f(x + n omega) phi^(n - n') / sqrt(1+E^2)
Matrix bounded_factor(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E);

/// Diagonal of F^{-1}: f(x + n omega) / sqrt(1+E^2).
Vector inverse_scaling(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E);

/// Analytic entry bounds of B: diagonal ||g|| + ||f||, off-diagonal
/// eps ||f|| e^{-rho |n-n'|}, with sup norms taken as coefficient l1 norms.
struct EntryBounds {
  double diagonal;
  double coupling;  // eps * ||f||
  double rho;
};
EntryBounds entry_bounds(const OperatorSpec& spec);

/// Least-squares fit log|G(n,n')| ~ offset - c_eff |n-n'|.
struct DecayFit {
  double c_eff = 0.0;
  double offset = 0.0;
  double r2 = 0.0;
  std::int64_t pairs = 0;
};

/// Uses ordered pairs with |n-n'| >= frac N and |G| > 1e-300. Throws
/// InsufficientData with fewer than 10 such pairs, InvalidArgument unless
/// 0 < frac < 1.
DecayFit decay_fit(const Matrix& G, double frac = 0.1);

struct GreenResult {
  Matrix G;
  double logdet_B = 0.0;
  int sign_B = 0;
  std::optional<DecayFit> decay;  // empty when the fit has too few pairs
  double max_entry = 0.0;
  double hadamard_B = 0.0;  // sum of log row norms of B
};

/// G = B^{-1} F^{-1}, solved column-wise from the log-domain LU of B.
/// Throws SingularWindow when B is numerically singular.
GreenResult green(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E);

/// Relative difference between |B^{-1}(n,n')| from the LU solve and the
/// cofactor ratio exp(logdet(B with row n' and column n removed) - logdet B).
/// n, n' are window-relative. Requires N <= 10; throws SingularWindow.
double cramer_check(const OperatorSpec& spec, TorusPoint x, IndexWindow w, double E, std::int64_t n,
                    std::int64_t np);

/// log of the geometric path-sum ceiling on |B^{-1}(n,n')| (window-relative):
///   P* q^{|n-n'|} / ((1 - q) |det B|),  q = e^{-rho} (1 + 2 eps'),
/// where eps' = max_{a != b} |B(a,b)| e^{rho |a-b|} and P* = prod max(1, ||row||).
/// Returns +infinity when q >= 1 or B is singular.
double path_expansion_log_ceiling(const Matrix& B, double rho, std::int64_t n, std::int64_t np);

/// int_T log(|g - E f| / sqrt(1+E^2)) dx by a midpoint rule on `cells` cells,
/// each cell within 2^-6 of a zero of g - E f subdivided into 8.
double log_pencil_integral(const MeromorphicPotential& p, double E, int cells = 8192);

struct AvgLogdetReport {
  double lhs = 0.0;     // grid mean of (1/N) log|det B_N(x, E)|
  double rhs = 0.0;     // log_pencil_integral
  double margin = 0.0;  // lhs - rhs
  std::int64_t singular_points = 0;
};

/// Requires x_grid >= 256; x runs over (j + 1/2) / x_grid.
AvgLogdetReport avg_logdet_check(const OperatorSpec& spec, double E, std::int64_t N, std::int64_t x_grid);

struct DeviationReport {
  std::int64_t M = 0;
  double threshold = 0.0;
  double bad_fraction = 0.0;
  double mean = 0.0;  // grid mean of u, the proxy for u^(0)
  std::vector<double> averages;  // weighted average at each grid point
};

/// Floor constant C~ used in u(x) = (1/N) log(|det B_N(x,E)| + C~^{-N}):
/// 10 (C_fg + 1) + 1 with C_fg = max(0, -min_E log_pencil_integral) over a
/// tangent-spaced energy grid.
double ldt_floor_constant(const MeromorphicPotential& p);

/// Large-deviation scan over x_j = (j + 1/2) / x_grid for every M in Ms
/// (u is computed once for the largest M). c_tilde <= 0 selects
/// ldt_floor_constant.
std::vector<DeviationReport> ldt_scan(const OperatorSpec& spec, double E, std::int64_t N,
                                      std::span<const std::int64_t> Ms, std::int64_t x_grid,
                                      double threshold, double c_tilde = 0.0);

DeviationReport ldt_scan(const OperatorSpec& spec, double E, std::int64_t N, std::int64_t M,
                         std::int64_t x_grid, double threshold, double c_tilde = 0.0);

struct ShiftResult {
  std::int64_t m = 0;
  GreenResult green;
  std::vector<std::int64_t> shifts;
  std::vector<double> logdets;  // logdet_B per candidate shift (-inf if singular)
};

/// Among |m| < floor(sqrt N) picks the shift maximizing log|det B_N(x + m omega)|
/// (ties: smaller |m|, then positive m) and returns its Green function on
/// [0, N) at phase x + m omega. Throws AllSingular.
ShiftResult good_shift(const OperatorSpec& spec, TorusPoint x, double E, std::int64_t N);

/// Values g and f along the orbit x + n omega for n in w.
struct OrbitSamples {
  IndexWindow w;
  std::vector<double> g;
  std::vector<double> f;
};
OrbitSamples sample_orbit(const OperatorSpec& spec, TorusPoint x, IndexWindow w);

/// B for the sub-window sub (contained in samples.w) from precomputed samples.
Matrix bounded_factor(const OperatorSpec& spec, const OrbitSamples& samples, IndexWindow sub, double E);

}  // namespace qplab
