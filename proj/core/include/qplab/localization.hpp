#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qplab/spectral.hpp"

namespace qplab {

/// Cover of a parent window by size-M children at stride M/2, the last one
/// flush with the parent's right edge.
struct Paving {
  IndexWindow parent;
  std::vector<IndexWindow> children;
  std::int64_t M = 0;
};

/// Requires 8 <= M <= N/2 or M == N (single child). Throws BadSizes
/// otherwise, or if the quarter-margin cover fails the exhaustive check.
Paving pave(IndexWindow parent, std::int64_t M);

/// True when every k in the parent has a child containing
/// [k - M/4, k + M/4] intersected with the parent. Checks every k.
bool covers_with_margin(const Paving& p);

/// Index of the first child containing the quarter-margin neighbourhood of k,
/// or -1.
std::int64_t covering_child(const Paving& p, std::int64_t k);

struct PatchReport {
  double c0 = 0.0;
  double slack = 0.0;
  std::int64_t children_checked = 0;
  double child_worst_margin = 0.0;  // min over child pairs of the log gap to the hypothesis bound

  double parent_max_entry = 0.0;
  double max_entry_ceiling = 0.0;  // 2 e^{c0 slack}
  bool max_entry_ok = false;

  std::int64_t decay_pairs = 0;  // ordered pairs with |n1 - n2| > N/10
  std::int64_t decay_violations = 0;
  double decay_worst_margin = 0.0;  // min of -c0|d|/2 - log|G|, >0 means held
  bool decay_ok = false;

  std::int64_t block_child = 0;  // child used for the block decomposition
  double resolvent_residual = 0.0;
  bool resolvent_ok = false;

  bool conclusions_hold() const noexcept { return max_entry_ok && decay_ok; }
};

inline constexpr double kResolventTolerance = 1e-8;

/// Checks the child hypothesis |G_child(n1,n2)| < e^{-c0 (|n1-n2| - slack)} on
/// every child, then tests the parent Green function (computed directly)
/// against max|G| <= 2 e^{c0 slack} and |G(n1,n2)| < e^{-c0 |n1-n2| / 2} for
/// |n1-n2| > N/10, and verifies G = G_blk + G_blk (H_blk - H) G on the
/// decomposition induced by the middle child. Windows are taken at phase x.
/// Throws HypothesisFailed naming the first violating child and pair.
PatchReport patch_check(const OperatorSpec& spec, TorusPoint x, double E, const Paving& paving, double c0,
                        double slack);

/// Smallest slack for which the hypothesis holds on every child given c0,
/// plus `margin`. Throws SingularWindow if a child is singular.
double minimal_slack(const OperatorSpec& spec, TorusPoint x, double E, const Paving& paving, double c0,
                     double margin = 1e-6);

/// Parent/child pipeline on [0, N): good phase from good_shift, c0 = smallest
/// fitted child decay rate, slack = minimal_slack(c0).
struct PatchPipeline {
  std::int64_t shift = 0;
  TorusPoint phase;
  Paving paving;
  std::vector<DecayFit> child_fits;
  PatchReport report;
};
PatchPipeline patch_pipeline(const OperatorSpec& spec, TorusPoint x, double E, std::int64_t N, std::int64_t M);

struct BadSet {
  double E = 0.0;
  std::int64_t N = 0;
  std::int64_t grid = 0;
  std::vector<bool> flagged;  // flagged[j] for x_j = (j + 1/2) / grid
  std::vector<std::int64_t> shift;  // accepted shift per point (0 when flagged)
  double fraction = 0.0;

  std::int64_t count() const noexcept;
};

/// Flags x_j when no shift |m| < floor(sqrt N) (tried in order 0, 1, -1, 2, ...)
/// gives a Green function on [m, m + N) with
/// |G(n1,n2)| < e^{-c0 (|n1-n2| - slack)}. Singular windows count as failures.
/// Requires grid >= 512.
BadSet bad_set(const OperatorSpec& spec, double E, std::int64_t N, std::int64_t grid, double c0, double slack);

/// Fit log(-log fraction) ~ log(c) + sigma log N over ladder entries with
/// 0 < fraction < 1. Empty with fewer than two such entries.
struct BadSetExponent {
  double sigma = 0.0;
  double log_c = 0.0;
  std::int64_t points = 0;
};
std::optional<BadSetExponent> fit_bad_set_exponent(const std::vector<BadSet>& ladder);

/// Visits of x0 + k omega, k = 1..N1, to the flagged cells (nearest cell).
struct OrbitCount {
  std::int64_t count = 0;
  std::int64_t N1 = 0;
  double delta = 0.1;
  double reference = 0.0;  // N1^{1 - delta}
  double ratio = 0.0;      // count / reference
  bool degenerate = false;  // count >= N1
};
OrbitCount orbit_count(const BadSet& bad, TorusPoint x0, const Frequency& freq, std::int64_t N1,
                       double delta = 0.1);

struct EigenPair {
  double E = 0.0;
  std::vector<double> xi;  // normalized to 1 at center
  double residual = 0.0;
  double decay_c = 0.0;  // +infinity when the tail is identically zero
  double decay_r2 = 0.0;
  std::int64_t center = 0;  // lattice index in [-N, N]
  bool interior = false;  // center at least N/10 away from both edges
};

struct NestedSpectrum {
  std::int64_t j = 0;
  std::vector<double> energies;  // spectrum of H on [-j, j], ascending
};

struct EigenReport {
  std::int64_t N = 0;
  std::vector<EigenPair> pairs;
  double max_residual = 0.0;
  double max_overlap = 0.0;  // max |<v_i, v_j>|, i != j, for the solver's orthonormal vectors
};

inline constexpr double kEigenResidualTolerance = 1e-8;

/// Eigenpairs of H on [-N, N] at phase x0 (only E in energy_window when
/// given). Each eigenvector is recomputed from the bounded factor with its
/// center entry pinned to 1, so the far tail is resolved below machine
/// epsilon. Throws PoleProximityError, EigenFailure if a residual exceeds
/// kEigenResidualTolerance.
EigenReport eigen_decay(const OperatorSpec& spec, TorusPoint x0, std::int64_t N,
                        std::optional<std::pair<double, double>> energy_window = std::nullopt);

/// Fraction of interior pairs with decay_r2 > r2_min and decay_c > 0.
double localized_fraction(const EigenReport& r, double r2_min = 0.9);

/// Spectra of H on [-j, j] for j = stride, 2 stride, ..., up to j_max.
std::vector<NestedSpectrum> nested_spectra(const OperatorSpec& spec, TorusPoint x0, std::int64_t j_max,
                                           std::int64_t stride);

/// Cauchy interlacing across consecutive nested windows:
/// lambda_k(outer) <= lambda_k(inner) <= lambda_{k + 2 (j' - j)}(outer).
/// Returns the number of violated inequalities.
std::int64_t interlacing_violations(const std::vector<NestedSpectrum>& nested);

}  // namespace qplab
