#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace qplab {

using cplx = std::complex<double>;

/// Zero/pole data of a meromorphic f on {|z| <= R} with |f(0)| = 1.
/// Zeros and poles are listed with multiplicity.
struct CartanInput {
  std::vector<cplx> zeros;
  std::vector<cplx> poles;
  double R = 1.0;
  double R2 = 0.5;
  double H = 0.1;   // radius of every zero disk
  double Hp = 0.1;  // radius of every pole disk
  double delta = 0.1;  // lower bound on |pole|
  double logM = 0.0;   // log max_{|z|=R} |f(z)|
};

struct Disk {
  cplx center;
  double radius;
};

/// Exclusion disks: one of radius H at each zero, one of radius Hp at the
/// reflection R^2 / conj(b) of each pole.
struct DiskSystem {
  std::vector<Disk> zero_disks;
  std::vector<Disk> pole_disks;

  bool excludes(cplx z) const noexcept;
  /// Smallest | |z - c| - r | over all disks (infinity when there are none).
  double boundary_distance(cplx z) const noexcept;
};

struct CartanBound {
  double bound;
  DiskSystem disks;
};

/// Lower bound -2 r logM / (R - r) for analytic f with |f(0)| = 1 on |z| = r.
/// Throws BadRadii unless 0 <= r < R, InvalidArgument if logM < 0.
double analytic_lower_bound(double logM, double R, double r);

/// Lower bound for log|f| on {|z| <= R2} outside the returned disks:
///   -2 R2/(R-R2) logM - n log((R+R2)/H) - n' [2R/(R-R2) log(1/delta) + log(R(R+R2)/Hp)]
/// Throws BadRadii, PoleTooClose, InvalidArgument.
CartanBound meromorphic_lower_bound(const CartanInput& input);

struct CartanVerification {
  std::int64_t sampled = 0;      // lattice points with |z| <= R2
  std::int64_t excluded = 0;     // inside an exclusion disk
  std::int64_t on_boundary = 0;  // within 1e-6 of a disk boundary, skipped
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  double bound = 0.0;
  double min_margin = 0.0;  // min of log|fn(z)| - bound over checked points
  cplx worst_point{};
};

/// Samples a grid x grid lattice over the square [-R2, R2]^2, keeps points with
/// |z| <= R2 outside all exclusion disks and compares log|fn| to the bound.
/// Throws NormalizationError when | |fn(0)| - 1 | > 1e-6.
CartanVerification verify_cartan(const std::function<cplx(cplx)>& fn, const CartanInput& input, int grid);

/// Normalized product of disk Blaschke factors R(z-a)/(R^2 - conj(a) z) over
/// zeros, divided by the same over poles, times exp(c1 z + c2 z^2). fn(0) = 1
/// and on |z| = R only the exponential contributes to |fn|.
class BlaschkeQuotient {
 public:
  BlaschkeQuotient(std::vector<cplx> zeros, std::vector<cplx> poles, double R, cplx c1, cplx c2);

  cplx operator()(cplx z) const;
  /// Upper bound for log max_{|z|=R} |fn| (fine sampling plus a Lipschitz allowance).
  double log_max_modulus() const;

  const std::vector<cplx>& zeros() const noexcept { return zeros_; }
  const std::vector<cplx>& poles() const noexcept { return poles_; }

 private:
  std::vector<cplx> zeros_;
  std::vector<cplx> poles_;
  double R_;
  cplx c1_, c2_;
  cplx scale_;
};

struct RandomCartanCase {
  BlaschkeQuotient fn;
  CartanInput input;
};

/// Draws up to max_zeros zeros in 0.02R <= |a| < 0.95R and up to max_poles
/// poles in delta <= |b| < 0.95R (area-uniform), plus a random zero-free part.
RandomCartanCase random_cartan_case(std::uint64_t seed, int max_zeros, int max_poles, double R,
                                    double R2, double H, double Hp, double delta);

}  // namespace qplab
