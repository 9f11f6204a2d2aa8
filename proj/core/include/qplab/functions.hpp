#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qplab/torus.hpp"

namespace qplab {

using cplx = std::complex<double>;

/// One Fourier coefficient h^(n).
struct FourierTerm {
  int n;
  cplx c;
};

/// Finite Fourier series h(z) = sum_{|n|<=d} h^(n) e^{2 pi i n z} with
/// Hermitian coefficients, so h is real on the real torus and entire.
class TrigPolynomial {
 public:
  TrigPolynomial() = default;

  /// Builds from a coefficient list. A term given only for n fills -n with
  /// the conjugate; terms given for both signs must be conjugate to 1e-12.
  /// Throws NotHermitian otherwise (including a non-real h^(0)).
  static TrigPolynomial from_terms(std::span<const FourierTerm> terms);
  static TrigPolynomial constant(double c);
  /// amp * cos(2 pi k x)
  static TrigPolynomial cosine(double amp, int k = 1);
  /// amp * sin(2 pi k x)
  static TrigPolynomial sine(double amp, int k = 1);

  int degree() const noexcept { return degree_; }
  cplx coeff(int n) const noexcept;
  std::vector<FourierTerm> terms() const;
  /// sum_n |h^(n)|, which bounds |h| on the real torus.
  double coeff_l1() const noexcept;
  bool is_zero() const noexcept;

  /// Complex evaluation; throws OutOfAnnulus when |Im z| > strip.
  cplx eval(cplx z, double strip) const;
  /// Real evaluation at a point of the torus.
  double operator()(double x) const noexcept;

  TrigPolynomial operator+(const TrigPolynomial& o) const;
  TrigPolynomial operator-(const TrigPolynomial& o) const;
  TrigPolynomial operator*(double s) const;

 private:
  int degree_ = 0;
  std::vector<cplx> c_{cplx{}};  // c_[n + degree_]
  void trim();
};

/// Real zero of f on [0,1). Even-order touching zeros (f keeps its sign)
/// are reported with multiplicity 2, sign changes with multiplicity 1.
struct TorusZero {
  TorusPoint x;
  int multiplicity;
};

/// Real zeros of f on the torus with |f| < tol after refinement. Scans
/// 10*degree + 64 samples for sign changes and local minima of |f| and refines
/// each by bisection (golden-section on |f| for touching zeros).
std::vector<TorusZero> zeros_on_torus(const TrigPolynomial& f, double tol = 1e-10);

/// max |h(x +- i r)| over a uniform grid, inflated by 1 + 2 pi degree / grid
/// to cover the gaps between samples. Requires grid >= 256.
double sup_norm_annulus(const TrigPolynomial& h, double r, int grid = 1024);

/// v = g / f with f vanishing somewhere on the torus (Maryland type).
class MeromorphicPotential {
 public:
  /// Throws InvalidArgument if f == 0 or g is a scalar multiple of f.
  MeromorphicPotential(TrigPolynomial g, TrigPolynomial f);

  /// g = sin(2 pi x), f = 1 + cos(2 pi x), i.e. v = tan(pi x).
  static MeromorphicPotential maryland();

  const TrigPolynomial& g() const noexcept { return g_; }
  const TrigPolynomial& f() const noexcept { return f_; }
  const std::vector<TorusZero>& f_zeros() const noexcept { return f_zeros_; }

  /// Same potential with f and g rescaled so that sup |f| <= 1.
  MeromorphicPotential normalized() const;

  /// g - E f as a trigonometric polynomial.
  TrigPolynomial linear_pencil(double E) const { return g_ - f_ * E; }

 private:
  TrigPolynomial g_;
  TrigPolynomial f_;
  std::vector<TorusZero> f_zeros_;
};

inline constexpr double kDefaultFMin = 1e-8;

/// g(x)/f(x); throws PoleProximityError when |f(x)| < f_min.
double eval_potential(const MeromorphicPotential& p, TorusPoint x, double f_min = kDefaultFMin);

/// Real even Toeplitz symbol phi^(n), 0 < |n| <= cutoff, with phi^(0) = 0
/// and |phi^(n)| < e^{-rho |n|}.
class ToeplitzKernel {
 public:
  ToeplitzKernel() = default;
  /// Throws KernelDecay ("kernel decay violated at n=..."), NotHermitian for
  /// non-conjugate pairs, InvalidArgument for phi^(0) != 0, complex
  /// coefficients, or rho <= 0.
  ToeplitzKernel(std::span<const FourierTerm> terms, double rho);

  /// phi^(n) = amplitude * e^{-rho |n|} for 0 < |n| <= cutoff; amplitude in (0,1).
  static ToeplitzKernel exponential(double rho, double amplitude, int cutoff);

  double rho() const noexcept { return rho_; }
  int cutoff() const noexcept { return static_cast<int>(c_.size()); }
  double at(long n) const noexcept;
  double l1() const noexcept;

 private:
  double rho_ = 1.0;
  std::vector<double> c_;  // c_[k-1] = phi^(k) = phi^(-k)
};

/// sum_{|n|>m} e^{-rho |n|} = 2 e^{-rho (m+1)} / (1 - e^{-rho}).
double kernel_tail_bound(double rho, long m);
inline double kernel_tail_bound(const ToeplitzKernel& k, long m) { return kernel_tail_bound(k.rho(), m); }

}  // namespace qplab
