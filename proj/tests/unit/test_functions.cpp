#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "qplab/error.hpp"
#include "qplab/functions.hpp"

using namespace qplab;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

TrigPolynomial random_poly(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<FourierTerm> t{{0, u(rng)}};
  for (int n = 1; n <= degree; ++n) t.push_back({n, cplx(u(rng), u(rng))});
  return TrigPolynomial::from_terms(t);
}

}  // namespace

TEST_CASE("evaluation on and off the real torus") {
  const auto c = TrigPolynomial::cosine(1.0);
  CHECK(c.eval(0.0, 0.5).real() == doctest::Approx(1.0));
  for (double y : {0.05, 0.1, 0.3}) {
    const cplx v = c.eval(cplx(0.0, y), 0.5);
    CHECK(v.real() == doctest::Approx(std::cosh(2 * std::numbers::pi * y)));
    CHECK(std::abs(v.imag()) < 1e-12);
  }
  CHECK(TrigPolynomial::sine(1.0).eval(0.25, 0.0).real() == doctest::Approx(1.0));
  CHECK(kind_of([&] { (void)c.eval(cplx(0.0, 0.6), 0.5); }) == ErrorKind::OutOfAnnulus);
}

TEST_CASE("Hermitian coefficients give real values and the mean is the constant term") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = random_poly(rng, 1 + trial % 6);
    const double scale = h.coeff_l1();
    double mean = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double x = i / 64.0;
      const cplx z = h.eval(x, 0.0);
      REQUIRE(std::abs(z.imag()) < 1e-12 * scale);
      REQUIRE(h(x) == doctest::Approx(z.real()).epsilon(1e-12).scale(scale));
      mean += h(x) / 64.0;
    }
    CHECK(mean == doctest::Approx(h.coeff(0).real()).epsilon(1e-10).scale(scale));
  }
}

TEST_CASE("from_terms fills and checks conjugates") {
  const std::vector<FourierTerm> one_sided{{2, cplx(0.5, 0.25)}};
  const auto h = TrigPolynomial::from_terms(one_sided);
  CHECK(h.degree() == 2);
  CHECK(h.coeff(-2) == std::conj(cplx(0.5, 0.25)));

  const std::vector<FourierTerm> bad{{1, cplx(1, 0)}, {-1, cplx(2, 0)}};
  CHECK(kind_of([&] { (void)TrigPolynomial::from_terms(bad); }) == ErrorKind::NotHermitian);
  const std::vector<FourierTerm> complex_mean{{0, cplx(1, 1)}};
  CHECK(kind_of([&] { (void)TrigPolynomial::from_terms(complex_mean); }) == ErrorKind::NotHermitian);
}

TEST_CASE("Maryland potential") {
  const auto p = MeromorphicPotential::maryland();
  CHECK(eval_potential(p, TorusPoint(0.25)) == doctest::Approx(1.0));
  CHECK(eval_potential(p, TorusPoint(0.125)) == doctest::Approx(0.41421356237309503));
  CHECK(kind_of([&] { (void)eval_potential(p, TorusPoint(0.5)); }) == ErrorKind::PoleProximity);
  REQUIRE(p.f_zeros().size() == 1);
  CHECK(p.f_zeros()[0].x.value() == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(p.f_zeros()[0].multiplicity == 2);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    if (std::abs(x - 0.5) < 1e-3) continue;
    REQUIRE(eval_potential(p, TorusPoint(x)) ==
            doctest::Approx(std::tan(std::numbers::pi * x)).epsilon(1e-9));
  }
}

TEST_CASE("constant potentials are rejected") {
  const auto f = TrigPolynomial::constant(1.0) + TrigPolynomial::cosine(1.0);
  CHECK_THROWS_AS(MeromorphicPotential(f * 3.0, f), Error);
  CHECK_THROWS_AS(MeromorphicPotential(f, TrigPolynomial()), Error);
}

TEST_CASE("real zeros on the torus") {
  const auto maryland_f = TrigPolynomial::constant(1.0) + TrigPolynomial::cosine(1.0);
  auto z = zeros_on_torus(maryland_f);
  REQUIRE(z.size() == 1);
  CHECK(z[0].x.value() == doctest::Approx(0.5).epsilon(1e-7));

  z = zeros_on_torus(TrigPolynomial::cosine(1.0));
  REQUIRE(z.size() == 2);
  CHECK(z[0].x.value() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(z[1].x.value() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(z[0].multiplicity == 1);

  CHECK(zeros_on_torus(TrigPolynomial::constant(2.0) + TrigPolynomial::cosine(1.0)).empty());

  // Simple zeros are refined to |f| < 1e-12 and f changes sign across them.
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto h = random_poly(rng, 1 + trial % 5);
    for (const auto& zero : zeros_on_torus(h)) {
      const double x = zero.x.value();
      CHECK(std::abs(h(x)) < 1e-10);
      if (zero.multiplicity == 1) {
        CHECK(std::abs(h(x)) < 1e-12 * std::max(1.0, h.coeff_l1()));
        CHECK((h(x - 1e-6) < 0) != (h(x + 1e-6) < 0));
      }
    }
  }
}

TEST_CASE("annulus sup norm") {
  const auto c = TrigPolynomial::cosine(1.0);
  const double safety = 1.0 + 2.0 * std::numbers::pi / 1024.0;
  CHECK(sup_norm_annulus(c, 0.0) == doctest::Approx(safety));
  CHECK(sup_norm_annulus(c, 0.1) == doctest::Approx(std::cosh(0.2 * std::numbers::pi) * safety).epsilon(1e-6));
  CHECK(sup_norm_annulus(TrigPolynomial::constant(-3.0), 0.2) == doctest::Approx(3.0));
  CHECK_THROWS_AS(sup_norm_annulus(c, 0.1, 100), Error);

  std::mt19937_64 rng(4);
  const auto h = random_poly(rng, 4);
  double last = 0.0;
  for (double r = 0.0; r <= 0.3; r += 0.02) {
    const double s = sup_norm_annulus(h, r);
    CHECK(s >= last);
    last = s;
  }
}

TEST_CASE("normalized potential has sup |f| <= 1") {
  const auto p = MeromorphicPotential::maryland().normalized();
  double best = 0.0;
  for (int i = 0; i < 4096; ++i) best = std::max(best, std::abs(p.f()(i / 4096.0)));
  CHECK(best <= 1.0);
  CHECK(p.g()(0.3) / p.f()(0.3) == doctest::Approx(std::tan(0.3 * std::numbers::pi)));
}

TEST_CASE("Toeplitz kernel decay and symmetry") {
  const auto k = ToeplitzKernel::exponential(1.0, 0.5, 4);
  CHECK(k.at(0) == 0.0);
  CHECK(k.at(2) == doctest::Approx(0.5 * std::exp(-2.0)));
  CHECK(k.at(-2) == k.at(2));
  CHECK(k.at(5) == 0.0);
  CHECK(k.cutoff() == 4);

  const std::vector<FourierTerm> violating{{3, 1.0}};
  try {
    ToeplitzKernel bad(violating, 1.0);
    FAIL("accepted a non-decaying kernel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::KernelDecay);
    CHECK(std::string(e.what()).find("kernel decay violated at n=3") != std::string::npos);
  }
  const std::vector<FourierTerm> boundary{{1, std::exp(-1.0)}};
  CHECK_THROWS_AS(ToeplitzKernel(boundary, 1.0), Error);
  CHECK_NOTHROW(ToeplitzKernel(boundary, 0.999));
  const std::vector<FourierTerm> with_mean{{0, 0.1}};
  CHECK_THROWS_AS(ToeplitzKernel(with_mean, 1.0), Error);
  const std::vector<FourierTerm> asym{{1, 0.1}, {-1, 0.2}};
  CHECK_THROWS_AS(ToeplitzKernel(asym, 1.0), Error);
  const std::vector<FourierTerm> complex_coeff{{1, cplx(0.1, 0.1)}};
  CHECK_THROWS_AS(ToeplitzKernel(complex_coeff, 1.0), Error);
}

TEST_CASE("geometric kernel tail") {
  const double e1 = std::exp(-1.0);
  CHECK(kernel_tail_bound(1.0, 0) == doctest::Approx(2 * e1 / (1 - e1)));
  CHECK(kernel_tail_bound(1.0, 0) == doctest::Approx(1.1640).epsilon(1e-4));
  CHECK(kernel_tail_bound(std::log(2.0), 3) == doctest::Approx(0.25));
  CHECK(kernel_tail_bound(std::numeric_limits<double>::infinity(), 3) == 0.0);
  // Direct summation.
  double sum = 0.0;
  for (int n = 6; n < 2000; ++n) sum += 2 * std::exp(-0.7 * n);
  CHECK(kernel_tail_bound(0.7, 5) == doctest::Approx(sum).epsilon(1e-12));
}
