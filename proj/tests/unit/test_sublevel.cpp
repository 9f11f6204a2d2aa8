#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "qplab/error.hpp"
#include "qplab/sublevel.hpp"

using namespace qplab;

TEST_CASE("sublevel of 2cos - 2 brackets the closed form") {
  const auto fn = [](double x) { return 2.0 * std::cos(2 * std::numbers::pi * x) - 2.0; };
  for (double eps : {0.01, 0.1, 1.0}) {
    const double exact = std::acos(1.0 - eps / 2.0) / std::numbers::pi;
    const auto b = sublevel_measure(fn, eps, 18);
    CHECK(b.lower <= exact);
    CHECK(exact <= b.upper);
    CHECK(b.upper - b.lower <= b.resolution() * static_cast<double>(b.undecided) + 1e-15);
  }
}

TEST_CASE("normalized linear measure of the Maryland pencil at E = 0") {
  const auto p = MeromorphicPotential::maryland();
  for (double eps : {0.001, 0.05, 0.3}) {
    const double exact = 2.0 / std::numbers::pi * std::asin(eps);
    const auto b = normalized_linear_measure(p, 0.0, eps, 20);
    CHECK(b.lower <= exact);
    CHECK(exact <= b.upper);
  }
}

TEST_CASE("potential measure of tan(pi x) matches arctan") {
  const auto p = MeromorphicPotential::maryland();
  for (double E : {0.0, 0.7, -3.0})
    for (double eps : {1e-4, 1e-2, 0.5}) {
      const double exact = (std::atan(E + eps) - std::atan(E - eps)) / std::numbers::pi;
      const auto b = potential_measure(p, E, eps, 22);
      CHECK(b.lower <= exact * (1 + 1e-12));
      CHECK(exact <= b.upper * (1 + 1e-12));
    }
}

TEST_CASE("certified brackets catch sets thinner than the sampling stride") {
  const auto p = MeromorphicPotential::maryland();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double E = std::pow(10.0, u(rng));
    const double eps = std::pow(10.0, -1.0 - std::abs(u(rng)));
    const double exact = (std::atan(E + eps) - std::atan(E - eps)) / std::numbers::pi;
    const auto b = potential_measure(p, E, eps, 20);
    CHECK(b.lower <= exact * (1 + 1e-12));
    CHECK(exact <= b.upper * (1 + 1e-12));
    const auto tight = potential_measure(p, E, eps, 24);
    CHECK(tight.upper - tight.lower < std::max(0.05 * exact, 1e-6));
  }
  const auto h = TrigPolynomial::cosine(2.0) - TrigPolynomial::constant(2.0);
  const auto cert = sublevel_measure(h, 0.01, 20);
  const double exact = std::acos(1.0 - 0.005) / std::numbers::pi;
  CHECK(cert.lower <= exact);
  CHECK(exact <= cert.upper);
}

TEST_CASE("brackets are nested and monotone") {
  const auto p = MeromorphicPotential::maryland();
  const auto coarse = potential_measure(p, 0.4, 0.01, 12);
  const auto fine = potential_measure(p, 0.4, 0.01, 20);
  CHECK(coarse.lower <= fine.lower + 1e-15);
  CHECK(fine.upper <= coarse.upper + 1e-15);

  double last_lower = 0.0, last_upper = 0.0;
  for (double eps : default_eps_list()) {
    const auto b = potential_measure(p, 0.4, eps, 18);
    CHECK(b.lower >= last_lower);
    CHECK(b.upper >= last_upper);
    CHECK(b.lower <= b.upper);
    last_lower = b.lower;
    last_upper = b.upper;
  }
}

TEST_CASE("whole torus and empty set") {
  const auto all = measure_set([](double) { return true; }, 16);
  CHECK(all.lower == 1.0);
  CHECK(all.upper == 1.0);
  const auto none = measure_set([](double) { return false; }, 16);
  CHECK(none.lower == 0.0);
  CHECK(none.upper == 0.0);
  CHECK_THROWS_AS(measure_set([](double) { return true; }, 0), Error);
  CHECK_THROWS_AS(measure_set([](double) { return true; }, 25), Error);
}

TEST_CASE("undecided mass above one half is an error") {
  // A set oscillating far below the resolution leaves every interval undecided.
  const auto comb = [](double x) { return std::sin(1e6 * x) > 0.0; };
  try {
    (void)measure_set(comb, 12);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DepthExceeded);
  }
}

TEST_CASE("default eps list") {
  const auto e = default_eps_list();
  REQUIRE(e.size() == 21);
  CHECK(e.front() == doctest::Approx(1e-5));
  CHECK(e.back() == doctest::Approx(1e-1));
  CHECK(e[5] == doctest::Approx(1e-4));
}

TEST_CASE("Lojasiewicz exponent of tan(pi x) is one") {
  const auto p = MeromorphicPotential::maryland();
  const auto eps = default_eps_list();
  for (double E : {0.0, 1.5}) {
    const auto fit = lojasiewicz_fit(p, E, eps, 22);
    CHECK(fit.c == doctest::Approx(1.0).epsilon(0.02));
    CHECK(fit.r2 > 0.99);
  }
}

TEST_CASE("fit_exponent recovers a power law and needs data") {
  std::vector<ExponentSample> s;
  for (double eps : {1e-4, 1e-3, 1e-2, 1e-1}) {
    MeasureBracket b;
    b.lower = b.upper = 3.0 * eps * eps;
    s.push_back({eps, b});
  }
  const auto fit = fit_exponent(s);
  CHECK(fit.c == doctest::Approx(2.0));
  CHECK(fit.log_K == doctest::Approx(std::log(3.0)));
  s.resize(1);
  CHECK_THROWS_AS(fit_exponent(s), Error);
  const std::vector<double> short_list{1e-3, 1e-2};
  CHECK_THROWS_AS(lojasiewicz_fit(MeromorphicPotential::maryland(), 0.0, short_list, 16), Error);
}

TEST_CASE("threshold above the sup gives the whole torus") {
  const auto b = sublevel_measure([](double x) { return std::sin(6.283185307179586 * x); }, 1.5, 16);
  CHECK(b.lower == 1.0);
  CHECK(b.upper == 1.0);
  const auto p = MeromorphicPotential::maryland();
  const auto all = normalized_linear_measure(p, 0.3, 3.5, 16);
  CHECK(all.lower == 1.0);
}

TEST_CASE("large-energy pencil approaches |f|") {
  const auto p = MeromorphicPotential::maryland();
  const double eps = 0.01;
  const auto far = normalized_linear_measure(p, 1e6, eps, 20);
  const auto direct = sublevel_measure([](double x) { return 1.0 + std::cos(6.283185307179586 * x); }, eps, 20);
  CHECK(far.lower <= direct.upper + 1e-6);
  CHECK(direct.lower <= far.upper + 1e-6);
}

TEST_CASE("analytic cosine potential: square-root edge and regular interior") {
  const MeromorphicPotential cosine(TrigPolynomial::cosine(2.0), TrigPolynomial::constant(1.0));
  const auto eps = default_eps_list();
  CHECK(lojasiewicz_fit(cosine, 2.0, eps, 22).c == doctest::Approx(0.5).epsilon(0.1));
  CHECK(lojasiewicz_fit(cosine, 0.0, eps, 22).c == doctest::Approx(1.0).epsilon(0.05));
}
