#include "qplab/functions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "qplab/error.hpp"

namespace qplab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHermitianTol = 1e-12;

}  // namespace

// ---------------------------------------------------------------------------
// TrigPolynomial

TrigPolynomial TrigPolynomial::from_terms(std::span<const FourierTerm> terms) {
  std::map<int, cplx> given;
  for (const auto& t : terms) {
    if (given.contains(t.n))
      throw Error(ErrorKind::NotHermitian, "coefficient n=" + std::to_string(t.n) + " given twice");
    given[t.n] = t.c;
  }
  int degree = 0;
  for (const auto& [n, c] : given) degree = std::max(degree, std::abs(n));
  TrigPolynomial h;
  h.degree_ = degree;
  h.c_.assign(static_cast<std::size_t>(2 * degree + 1), cplx{});
  for (const auto& [n, c] : given) {
    if (n == 0) {
      if (std::abs(c.imag()) > kHermitianTol * std::max(1.0, std::abs(c)))
        throw Error(ErrorKind::NotHermitian, "constant coefficient must be real");
      h.c_[static_cast<std::size_t>(degree)] = cplx(c.real(), 0.0);
      continue;
    }
    auto mirror = given.find(-n);
    if (mirror != given.end()) {
      const cplx expect = std::conj(mirror->second);
      if (std::abs(c - expect) > kHermitianTol * std::max(1.0, std::abs(c)))
        throw Error(ErrorKind::NotHermitian,
                    "coefficients at n=" + std::to_string(n) + " and n=" + std::to_string(-n) +
                        " are not conjugate");
    }
    h.c_[static_cast<std::size_t>(n + degree)] = c;
    if (mirror == given.end()) h.c_[static_cast<std::size_t>(-n + degree)] = std::conj(c);
  }
  h.trim();
  return h;
}

TrigPolynomial TrigPolynomial::constant(double c) {
  const FourierTerm t{0, c};
  return from_terms(std::span(&t, 1));
}

TrigPolynomial TrigPolynomial::cosine(double amp, int k) {
  const FourierTerm t{k, amp / 2.0};
  return from_terms(std::span(&t, 1));
}

TrigPolynomial TrigPolynomial::sine(double amp, int k) {
  // sin(2 pi k x) = (e^{2 pi i k x} - e^{-2 pi i k x}) / (2i)
  const FourierTerm t{k, cplx(0.0, -amp / 2.0)};
  return from_terms(std::span(&t, 1));
}

void TrigPolynomial::trim() {
  int d = degree_;
  while (d > 0 && c_[static_cast<std::size_t>(degree_ + d)] == cplx{} &&
         c_[static_cast<std::size_t>(degree_ - d)] == cplx{})
    --d;
  if (d == degree_) return;
  std::vector<cplx> out(c_.begin() + (degree_ - d), c_.begin() + (degree_ + d + 1));
  c_ = std::move(out);
  degree_ = d;
}

cplx TrigPolynomial::coeff(int n) const noexcept {
  if (std::abs(n) > degree_) return {};
  return c_[static_cast<std::size_t>(n + degree_)];
}

std::vector<FourierTerm> TrigPolynomial::terms() const {
  std::vector<FourierTerm> out;
  for (int n = -degree_; n <= degree_; ++n)
    if (coeff(n) != cplx{}) out.push_back({n, coeff(n)});
  return out;
}

double TrigPolynomial::coeff_l1() const noexcept {
  double s = 0.0;
  for (const auto& c : c_) s += std::abs(c);
  return s;
}

bool TrigPolynomial::is_zero() const noexcept {
  return std::all_of(c_.begin(), c_.end(), [](cplx c) { return c == cplx{}; });
}

cplx TrigPolynomial::eval(cplx z, double strip) const {
  if (std::abs(z.imag()) > strip)
    throw Error(ErrorKind::OutOfAnnulus, "|Im z| = " + std::to_string(std::abs(z.imag())) +
                                             " exceeds strip " + std::to_string(strip));
  const double x = wrap_unit(z.real());
  const double y = z.imag();
  cplx acc = c_[static_cast<std::size_t>(degree_)];
  for (int n = 1; n <= degree_; ++n) {
    const double phase = kTwoPi * n * x;
    const cplx e(std::cos(phase), std::sin(phase));
    const double up = std::exp(-kTwoPi * n * y);  // |e^{2 pi i n z}|
    const double down = std::exp(kTwoPi * n * y);
    acc += coeff(n) * e * up + coeff(-n) * std::conj(e) * down;
  }
  return acc;
}

double TrigPolynomial::operator()(double x) const noexcept {
  x = wrap_unit(x);
  double acc = c_[static_cast<std::size_t>(degree_)].real();
  for (int n = 1; n <= degree_; ++n) {
    const double phase = kTwoPi * n * x;
    const cplx c = coeff(n);
    acc += 2.0 * (c.real() * std::cos(phase) - c.imag() * std::sin(phase));
  }
  return acc;
}

TrigPolynomial TrigPolynomial::operator+(const TrigPolynomial& o) const {
  TrigPolynomial h;
  h.degree_ = std::max(degree_, o.degree_);
  h.c_.assign(static_cast<std::size_t>(2 * h.degree_ + 1), cplx{});
  for (int n = -h.degree_; n <= h.degree_; ++n)
    h.c_[static_cast<std::size_t>(n + h.degree_)] = coeff(n) + o.coeff(n);
  h.trim();
  return h;
}

TrigPolynomial TrigPolynomial::operator-(const TrigPolynomial& o) const { return *this + o * -1.0; }

TrigPolynomial TrigPolynomial::operator*(double s) const {
  TrigPolynomial h = *this;
  for (auto& c : h.c_) c *= s;
  h.trim();
  return h;
}

// ---------------------------------------------------------------------------
// zeros

namespace {

double bisect_root(const TrigPolynomial& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double minimize_abs(const TrigPolynomial& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = std::abs(f(c)), fd = std::abs(f(d));
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = std::abs(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = std::abs(f(d));
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<TorusZero> zeros_on_torus(const TrigPolynomial& f, double tol) {
  if (f.is_zero()) throw Error(ErrorKind::InvalidArgument, "f is identically zero");
  const int S = 10 * f.degree() + 64;
  std::vector<double> xs(static_cast<std::size_t>(S)), vals(static_cast<std::size_t>(S));
  for (int i = 0; i < S; ++i) {
    xs[static_cast<std::size_t>(i)] = static_cast<double>(i) / S;
    vals[static_cast<std::size_t>(i)] = f(xs[static_cast<std::size_t>(i)]);
  }
  auto at = [&](int i) { return vals[static_cast<std::size_t>((i % S + S) % S)]; };
  auto x_at = [&](int i) { return static_cast<double>(i) / S; };  // may exceed [0,1)

  std::vector<double> candidates;
  for (int i = 0; i < S; ++i) {
    const double a = at(i), b = at(i + 1);
    if (a == 0.0) candidates.push_back(x_at(i));
    if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) candidates.push_back(bisect_root(f, x_at(i), x_at(i + 1)));
    const double m = std::abs(a);
    if (m <= std::abs(at(i - 1)) && m <= std::abs(at(i + 1))) {
      const double x = minimize_abs(f, x_at(i - 1), x_at(i + 1));
      if (std::abs(f(x)) < tol) candidates.push_back(x);
    }
  }

  std::vector<TorusZero> out;
  const double h = 1e-4 / std::max(1, f.degree());
  for (double c : candidates) {
    const double x = wrap_unit(c);
    if (!(std::abs(f(x)) < tol)) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const TorusZero& z) {
      return torus_dist(z.x.value() - x) < 1e-8;
    });
    if (dup) continue;
    const double left = f(x - h), right = f(x + h);
    const bool sign_change = (left < 0.0) != (right < 0.0);
    out.push_back({TorusPoint(x), sign_change ? 1 : 2});
  }
  std::sort(out.begin(), out.end(),
            [](const TorusZero& a, const TorusZero& b) { return a.x.value() < b.x.value(); });
  return out;
}

double sup_norm_annulus(const TrigPolynomial& h, double r, int grid) {
  if (grid < 256) throw Error(ErrorKind::InvalidArgument, "sup_norm_annulus needs grid >= 256");
  const double strip = std::abs(r);
  double best = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double x = static_cast<double>(i) / grid;
    best = std::max(best, std::abs(h.eval(cplx(x, strip), strip)));
    if (strip > 0.0) best = std::max(best, std::abs(h.eval(cplx(x, -strip), strip)));
  }
  return best * (1.0 + kTwoPi * h.degree() / grid);
}

// ---------------------------------------------------------------------------
// MeromorphicPotential

MeromorphicPotential::MeromorphicPotential(TrigPolynomial g, TrigPolynomial f)
    : g_(std::move(g)), f_(std::move(f)) {
  if (f_.is_zero()) throw Error(ErrorKind::InvalidArgument, "f must not be identically zero");
  // g = lambda f  <=>  every 2x2 minor of the coefficient pair vanishes.
  const int d = std::max(g_.degree(), f_.degree());
  const double scale = g_.coeff_l1() * f_.coeff_l1();
  bool proportional = true;
  for (int n = -d; n <= d && proportional; ++n)
    for (int m = n + 1; m <= d && proportional; ++m)
      if (std::abs(g_.coeff(n) * f_.coeff(m) - g_.coeff(m) * f_.coeff(n)) > 1e-12 * scale)
        proportional = false;
  if (proportional) throw Error(ErrorKind::InvalidArgument, "v = g/f is constant (g is a multiple of f)");
  f_zeros_ = zeros_on_torus(f_, 1e-10);
}

MeromorphicPotential MeromorphicPotential::maryland() {
  return {TrigPolynomial::sine(1.0), TrigPolynomial::constant(1.0) + TrigPolynomial::cosine(1.0)};
}

MeromorphicPotential MeromorphicPotential::normalized() const {
  const double s = sup_norm_annulus(f_, 0.0, 4096);
  if (s <= 1.0) return *this;
  return {g_ * (1.0 / s), f_ * (1.0 / s)};
}

double eval_potential(const MeromorphicPotential& p, TorusPoint x, double f_min) {
  if (!(f_min > 0.0)) throw Error(ErrorKind::InvalidArgument, "f_min must be > 0");
  const double fv = p.f()(x.value());
  if (std::abs(fv) < f_min) throw PoleProximityError(x.value(), std::abs(fv), 0);
  return p.g()(x.value()) / fv;
}

// ---------------------------------------------------------------------------
// ToeplitzKernel

ToeplitzKernel::ToeplitzKernel(std::span<const FourierTerm> terms, double rho) : rho_(rho) {
  if (!(rho > 0.0)) throw Error(ErrorKind::InvalidArgument, "kernel rho must be > 0");
  std::map<int, double> given;
  for (const auto& t : terms) {
    if (t.n == 0) {
      if (t.c != cplx{}) throw Error(ErrorKind::InvalidArgument, "kernel requires phi^(0) = 0");
      continue;
    }
    if (t.c.imag() != 0.0)
      throw Error(ErrorKind::InvalidArgument,
                  "kernel coefficients must be real (n=" + std::to_string(t.n) + ")");
    if (std::abs(t.c.real()) >= std::exp(-rho * std::abs(t.n)))
      throw Error(ErrorKind::KernelDecay, "kernel decay violated at n=" + std::to_string(t.n));
    if (given.contains(t.n))
      throw Error(ErrorKind::NotHermitian, "kernel coefficient n=" + std::to_string(t.n) + " given twice");
    given[t.n] = t.c.real();
  }
  int cutoff = 0;
  for (const auto& [n, c] : given) cutoff = std::max(cutoff, std::abs(n));
  c_.assign(static_cast<std::size_t>(cutoff), 0.0);
  for (const auto& [n, c] : given) {
    auto mirror = given.find(-n);
    if (mirror != given.end() && std::abs(mirror->second - c) > kHermitianTol * std::max(1.0, std::abs(c)))
      throw Error(ErrorKind::NotHermitian,
                  "kernel coefficients at n=" + std::to_string(n) + " and n=" + std::to_string(-n) +
                      " differ");
    c_[static_cast<std::size_t>(std::abs(n) - 1)] = c;
  }
}

ToeplitzKernel ToeplitzKernel::exponential(double rho, double amplitude, int cutoff) {
  if (!(amplitude > 0.0 && amplitude < 1.0))
    throw Error(ErrorKind::InvalidArgument, "kernel amplitude must lie in (0,1)");
  std::vector<FourierTerm> terms;
  for (int n = 1; n <= cutoff; ++n) terms.push_back({n, amplitude * std::exp(-rho * n)});
  return ToeplitzKernel(terms, rho);
}

double ToeplitzKernel::at(long n) const noexcept {
  const long k = std::abs(n);
  if (k == 0 || k > static_cast<long>(c_.size())) return 0.0;
  return c_[static_cast<std::size_t>(k - 1)];
}

double ToeplitzKernel::l1() const noexcept {
  double s = 0.0;
  for (double c : c_) s += 2.0 * std::abs(c);
  return s;
}

double kernel_tail_bound(double rho, long m) {
  if (m < 0) throw Error(ErrorKind::InvalidArgument, "tail index must be >= 0");
  if (std::isinf(rho)) return 0.0;
  return 2.0 * std::exp(-rho * static_cast<double>(m + 1)) / (-std::expm1(-rho));
}

}  // namespace qplab
