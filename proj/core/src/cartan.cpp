#include "qplab/cartan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "qplab/error.hpp"
#include "qplab/parallel.hpp"

namespace qplab {

namespace {

constexpr double kBoundarySkip = 1e-6;

void validate(const CartanInput& in) {
  if (!(in.R2 > 0.0 && in.R2 < in.R && in.R <= 1.0))
    throw Error(ErrorKind::BadRadii, "need 0 < R2 < R <= 1");
  if (!(in.H > 0.0 && in.H < 1.0 && in.Hp > 0.0 && in.Hp < 1.0))
    throw Error(ErrorKind::InvalidArgument, "disk radii H, H' must lie in (0,1)");
  if (!(in.delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be > 0");
  for (const auto& a : in.zeros)
    if (!(std::abs(a) < in.R)) throw Error(ErrorKind::InvalidArgument, "zero outside |z| < R");
  for (const auto& b : in.poles) {
    if (std::abs(b) < in.delta)
      throw Error(ErrorKind::PoleTooClose, "pole modulus " + std::to_string(std::abs(b)) + " < delta");
    if (!(std::abs(b) < in.R)) throw Error(ErrorKind::InvalidArgument, "pole outside |z| < R");
  }
}

}  // namespace

bool DiskSystem::excludes(cplx z) const noexcept {
  auto inside = [&](const Disk& d) { return std::abs(z - d.center) < d.radius; };
  return std::any_of(zero_disks.begin(), zero_disks.end(), inside) ||
         std::any_of(pole_disks.begin(), pole_disks.end(), inside);
}

double DiskSystem::boundary_distance(cplx z) const noexcept {
  double best = std::numeric_limits<double>::infinity();
  for (const auto* list : {&zero_disks, &pole_disks})
    for (const auto& d : *list) best = std::min(best, std::abs(std::abs(z - d.center) - d.radius));
  return best;
}

double analytic_lower_bound(double logM, double R, double r) {
  if (!(r >= 0.0 && r < R)) throw Error(ErrorKind::BadRadii, "need 0 <= r < R");
  if (logM < 0.0) throw Error(ErrorKind::InvalidArgument, "log M_f(R) must be >= 0 when |f(0)| = 1");
  return -2.0 * r * logM / (R - r);
}

CartanBound meromorphic_lower_bound(const CartanInput& in) {
  validate(in);
  const double R = in.R, R2 = in.R2;
  const auto n = static_cast<double>(in.zeros.size());
  const auto np = static_cast<double>(in.poles.size());
  double bound = -2.0 * R2 / (R - R2) * in.logM;
  if (n > 0) bound -= n * std::log((R + R2) / in.H);
  if (np > 0)
    bound -= np * (2.0 * R / (R - R2) * std::log(1.0 / in.delta) + std::log(R * (R + R2) / in.Hp));

  CartanBound out{bound, {}};
  for (const auto& a : in.zeros) out.disks.zero_disks.push_back({a, in.H});
  for (const auto& b : in.poles) out.disks.pole_disks.push_back({R * R / std::conj(b), in.Hp});
  return out;
}

CartanVerification verify_cartan(const std::function<cplx(cplx)>& fn, const CartanInput& input, int grid) {
  if (grid < 2) throw Error(ErrorKind::InvalidArgument, "grid must be >= 2");
  const double f0 = std::abs(fn(cplx{}));
  if (!(std::abs(f0 - 1.0) <= 1e-6))
    throw Error(ErrorKind::NormalizationError, "|fn(0)| = " + std::to_string(f0));
  const CartanBound cb = meromorphic_lower_bound(input);
  const double R2 = input.R2;
  const double step = 2.0 * R2 / (grid - 1);

  // One row of the lattice per work item, reduced in row order.
  std::vector<CartanVerification> rows(static_cast<std::size_t>(grid));
  parallel::for_each_index(rows.size(), [&](std::size_t i) {
    CartanVerification r;
    r.min_margin = std::numeric_limits<double>::infinity();
    const double y = -R2 + step * static_cast<double>(i);
    for (int j = 0; j < grid; ++j) {
      const cplx z(-R2 + step * j, y);
      if (std::abs(z) > R2) continue;
      ++r.sampled;
      if (cb.disks.boundary_distance(z) < kBoundarySkip) {
        ++r.on_boundary;
        continue;
      }
      if (cb.disks.excludes(z)) {
        ++r.excluded;
        continue;
      }
      ++r.checked;
      const double margin = std::log(std::abs(fn(z))) - cb.bound;
      if (margin < 0.0) ++r.violations;
      if (margin < r.min_margin) {
        r.min_margin = margin;
        r.worst_point = z;
      }
    }
    rows[i] = r;
  });

  CartanVerification total;
  total.bound = cb.bound;
  total.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    total.sampled += r.sampled;
    total.excluded += r.excluded;
    total.on_boundary += r.on_boundary;
    total.checked += r.checked;
    total.violations += r.violations;
    if (r.min_margin < total.min_margin) {
      total.min_margin = r.min_margin;
      total.worst_point = r.worst_point;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------

BlaschkeQuotient::BlaschkeQuotient(std::vector<cplx> zeros, std::vector<cplx> poles, double R, cplx c1,
                                   cplx c2)
    : zeros_(std::move(zeros)), poles_(std::move(poles)), R_(R), c1_(c1), c2_(c2), scale_(1.0, 0.0) {
  // Each factor equals -a/R at the origin; divide that out.
  for (const auto& a : zeros_) scale_ /= (-a / R_);
  for (const auto& b : poles_) scale_ *= (-b / R_);
}

cplx BlaschkeQuotient::operator()(cplx z) const {
  cplx v = scale_ * std::exp(c1_ * z + c2_ * z * z);
  for (const auto& a : zeros_) v *= R_ * (z - a) / (R_ * R_ - std::conj(a) * z);
  for (const auto& b : poles_) v /= R_ * (z - b) / (R_ * R_ - std::conj(b) * z);
  return v;
}

double BlaschkeQuotient::log_max_modulus() const {
  constexpr int kSamples = 4096;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kSamples; ++k) {
    const cplx z = std::polar(R_, 2.0 * std::numbers::pi * k / kSamples);
    best = std::max(best, (c1_ * z + c2_ * z * z).real());
  }
  // d/dtheta Re h(R e^{i theta}) is bounded by R|c1| + 2R^2|c2|.
  const double lipschitz = R_ * std::abs(c1_) + 2.0 * R_ * R_ * std::abs(c2_);
  return best + lipschitz * std::numbers::pi / kSamples + std::log(std::abs(scale_));
}

RandomCartanCase random_cartan_case(std::uint64_t seed, int max_zeros, int max_poles, double R, double R2,
                                    double H, double Hp, double delta) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto in_annulus = [&](double r_lo, double r_hi) {
    const double u = unit(rng);
    const double r = std::sqrt(r_lo * r_lo + u * (r_hi * r_hi - r_lo * r_lo));
    return std::polar(r, 2.0 * std::numbers::pi * unit(rng));
  };
  std::uniform_int_distribution<int> nz(0, max_zeros), np(0, max_poles);
  std::vector<cplx> zeros, poles;
  for (int k = nz(rng); k > 0; --k) zeros.push_back(in_annulus(0.02 * R, 0.95 * R));
  for (int k = np(rng); k > 0; --k) poles.push_back(in_annulus(delta, 0.95 * R));
  const cplx c1 = std::polar(0.5 * unit(rng), 2.0 * std::numbers::pi * unit(rng));
  const cplx c2 = std::polar(0.5 * unit(rng), 2.0 * std::numbers::pi * unit(rng));
  BlaschkeQuotient fn(zeros, poles, R, c1, c2);
  CartanInput input{zeros, poles, R, R2, H, Hp, delta, fn.log_max_modulus()};
  return {std::move(fn), std::move(input)};
}

}  // namespace qplab
