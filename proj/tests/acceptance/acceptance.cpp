// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Regression baselines live in QPLAB_GOLDEN_DIR; a missing baseline
// is written on first run and compared (1% relative) afterwards.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "qplab/cartan.hpp"
#include "qplab/error.hpp"
#include "qplab/localization.hpp"
#include "qplab/parallel.hpp"
#include "qplab/spectral.hpp"
#include "qplab/sublevel.hpp"
#include "qplab_cli/commands.hpp"
#include "qplab_cli/config.hpp"

using namespace qplab;

namespace {

const double kGolden = 0.6180339887498949;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Windows whose log-determinant was computed anywhere in the suite, for the
// Hadamard ceiling criterion.
struct HadamardLog {
  std::int64_t windows = 0;
  std::int64_t violations = 0;
  void record(double logdet_B, double ceiling) {
    ++windows;
    if (!(logdet_B <= ceiling + 1e-12 * std::max(1.0, std::abs(ceiling)))) ++violations;
  }
  void record(const Matrix& B) { record(logdet(B).logabs, hadamard_log_bound(B)); }
};

HadamardLog hadamard;

double safe_phase(const OperatorSpec& s, std::mt19937_64& rng, std::int64_t N) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double x = u(rng);
    bool ok = true;
    for (std::int64_t n = 0; n < N && ok; ++n) ok = std::abs(s.potential.f()(orbit_point(x, s.omega(), n))) > 1e-3;
    if (ok) return x;
  }
}

// name,value rows.
using Baseline = std::vector<std::pair<std::string, double>>;

std::optional<Baseline> read_baseline(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  Baseline b;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) continue;
    const std::string v = line.substr(comma + 1);
    b.emplace_back(line.substr(0, comma), v == "inf" ? std::numeric_limits<double>::infinity() : std::stod(v));
  }
  return b;
}

void write_baseline(const std::filesystem::path& p, const Baseline& b) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  out << "name,value\n";
  char buf[64];
  for (const auto& [k, v] : b) {
    if (std::isinf(v)) {
      out << k << ",inf\n";
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << k << ',' << buf << '\n';
    }
  }
}

// Empty string on match (or on first write), otherwise a description.
std::string check_baseline(const std::string& file, const Baseline& now, double rel = 0.01) {
  const std::filesystem::path p = std::filesystem::path(QPLAB_GOLDEN_DIR) / file;
  const auto old = read_baseline(p);
  if (!old) {
    write_baseline(p, now);
    return {};
  }
  if (old->size() != now.size()) return file + ": " + std::to_string(now.size()) + " rows vs " + std::to_string(old->size());
  for (std::size_t i = 0; i < now.size(); ++i) {
    const auto& [k, v] = now[i];
    const auto& [ok, ov] = (*old)[i];
    if (k != ok) return file + ": row " + std::to_string(i) + " is " + k + ", expected " + ok;
    if (std::isinf(v) || std::isinf(ov)) {
      if (v != ov) return file + ": " + k + " = " + fmt(v) + " vs " + fmt(ov);
      continue;
    }
    if (std::abs(v - ov) > rel * std::abs(ov) + 1e-12) return file + ": " + k + " = " + fmt(v) + " vs " + fmt(ov);
  }
  return {};
}

struct RandomInstance {
  OperatorSpec spec;
  double x;
  IndexWindow w;
  double E;
};

// Criteria 1 and 2 share the instances.
std::vector<RandomInstance> factorization_instances() {
  std::mt19937_64 rng(2024);
  const double energies[] = {0.0, 1.0, -1.0, 1e3, -1e3, 1e8, -1e8};
  std::vector<RandomInstance> out;
  for (int i = 0; i < 200; ++i) {
    auto spec = oracle::random_spec(rng);
    const auto N = static_cast<std::int64_t>(1 + rng() % 64);
    const double x = safe_phase(spec, rng, N);
    out.push_back({std::move(spec), x, IndexWindow::first(N), energies[i % 7]});
  }
  return out;
}

Outcome factorization_identity() {
  double worst = 0.0;
  for (const auto& in : factorization_instances()) {
    const auto fp = factorize(in.spec, TorusPoint(in.x), in.w, in.E);
    const Matrix H = oracle::direct_window(in.spec, in.x, in.w, in.E);
    const Matrix FB = fp.F_diag.asDiagonal() * fp.B;
    worst = std::max(worst, max_abs(FB - H) / std::max(1.0, max_abs(H)));
    hadamard.record(fp.B);
  }
  return {worst <= 1e-10, "max |F B - (H-E)| / scale = " + fmt(worst) + " (tol 1e-10), 200 instances"};
}

Outcome bounded_entries() {
  std::int64_t checked = 0, violations = 0;
  const auto test = [&](const OperatorSpec& spec, double x, IndexWindow w, double E) {
    const Matrix B = bounded_factor(spec, TorusPoint(x), w, E);
    const auto eb = entry_bounds(spec);
    for (Eigen::Index i = 0; i < B.rows(); ++i)
      for (Eigen::Index j = 0; j < B.cols(); ++j) {
        const double bound =
            i == j ? eb.diagonal : eb.coupling * std::exp(-eb.rho * static_cast<double>(std::abs(i - j)));
        ++checked;
        if (!std::isfinite(B(i, j)) || std::abs(B(i, j)) > bound * (1 + 1e-12)) ++violations;
      }
  };
  for (const auto& in : factorization_instances()) test(in.spec, in.x, in.w, in.E);
  // Log-spaced energies of both signs, phases near and on the poles included.
  std::mt19937_64 rng(77);
  for (int k = -8; k <= 8; ++k)
    for (double sign : {1.0, -1.0}) {
      auto spec = oracle::random_spec(rng);
      test(spec, 0.5 - kGolden, IndexWindow::first(24), sign * std::pow(10.0, k));
      test(oracle::maryland_spec(0.05), std::uniform_real_distribution<double>(0, 1)(rng), IndexWindow::first(24),
           sign * std::pow(10.0, k));
    }
  return {violations == 0 && checked > 0,
          std::to_string(violations) + " violations over " + std::to_string(checked) + " entries, |E| up to 1e8"};
}

Outcome green_oracle() {
  std::mt19937_64 rng(31337);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto spec = oracle::random_spec(rng);
    const auto N = static_cast<std::int64_t>(1 + i % 8);
    const double x = safe_phase(spec, rng, N);
    const double E = std::uniform_real_distribution<double>(-3, 3)(rng);
    const auto r = green(spec, TorusPoint(x), IndexWindow::first(N), E);
    const Matrix ref = oracle::direct_inverse(oracle::direct_window(spec, x, IndexWindow::first(N), E));
    worst = std::max(worst, max_abs(r.G - ref) / max_abs(ref));
    hadamard.record(r.logdet_B, r.hadamard_B);
  }
  return {worst <= 1e-8, "max |G - (H-E)^-1| / max|G| = " + fmt(worst) + " (tol 1e-8), 100 instances"};
}

Outcome cramer_identity() {
  std::mt19937_64 rng(4242);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto spec = oracle::random_spec(rng);
    const auto N = static_cast<std::int64_t>(1 + i % 8);
    const double x = safe_phase(spec, rng, N);
    const double E = std::uniform_real_distribution<double>(-3, 3)(rng);
    const auto n = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(N));
    const auto np = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(N));
    worst = std::max(worst, cramer_check(spec, TorusPoint(x), IndexWindow::first(N), E, n, np));
    hadamard.record(bounded_factor(spec, TorusPoint(x), IndexWindow::first(N), E));
  }
  return {worst < 1e-8, "max relative minor-ratio error = " + fmt(worst) + " (tol 1e-8), 100 instances"};
}

Outcome cartan_verification() {
  std::int64_t violations = 0, checked = 0, excluded = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = random_cartan_case(seed, 4, 4, 1.0, 0.5, 0.05, 0.05, 0.1);
    const auto v = verify_cartan([&](cplx z) { return c.fn(z); }, c.input, 400);
    violations += v.violations;
    checked += v.checked;
    excluded += v.excluded;
    min_margin = std::min(min_margin, v.min_margin);
  }
  return {violations == 0, std::to_string(violations) + " violations, " + std::to_string(checked) + " points checked, " +
                               std::to_string(excluded) + " excluded, min margin " + fmt(min_margin)};
}

Outcome lojasiewicz_exponents() {
  const auto eps = default_eps_list();
  const auto maryland = MeromorphicPotential::maryland();
  const MeromorphicPotential cosine(TrigPolynomial::cosine(2.0), TrigPolynomial::constant(1.0));
  const double c_tan = lojasiewicz_fit(maryland, 0.0, eps, 22).c;
  const double c_edge = lojasiewicz_fit(cosine, 2.0, eps, 22).c;
  const double c_mid = lojasiewicz_fit(cosine, 0.0, eps, 22).c;
  // The fitted brackets must contain the closed form for tan.
  bool contains = true;
  for (double e : eps) {
    const auto b = potential_measure(maryland, 0.0, e, 22);
    const double exact = 2.0 / std::numbers::pi * std::atan(e);
    contains = contains && b.lower <= exact * (1 + 1e-12) && exact <= b.upper * (1 + 1e-12);
  }
  const bool pass = std::abs(c_tan - 1.0) <= 0.05 && std::abs(c_edge - 0.5) <= 0.05 && std::abs(c_mid - 1.0) <= 0.05 &&
                    contains;
  return {pass, "tan E=0: c=" + fmt(c_tan) + ", 2cos E=2: c=" + fmt(c_edge) + ", 2cos E=0: c=" + fmt(c_mid) +
                    " (tol 0.05), closed form bracketed: " + (contains ? "yes" : "no")};
}

Outcome chain_inequality() {
  const auto p = MeromorphicPotential::maryland();
  const std::pair<double, double> cases[] = {{0.0, 1e-4}, {0.0, 1e-2}, {0.5, 1e-3}, {-1.0, 1e-2}, {2.0, 1e-4},
                                             {-3.0, 1e-3}, {10.0, 1e-2}, {0.3, 0.1}, {-0.7, 1e-5}, {100.0, 1e-3}};
  const int depth = 20;
  const double res = std::ldexp(1.0, -depth);
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [E, eps] : cases) {
    const auto pencil = p.linear_pencil(E);
    const double root = std::sqrt(eps);
    const auto lhs = sublevel_measure(pencil, eps, depth);
    const auto near_level = potential_measure(p, E, root, depth);
    const auto near_pole = sublevel_measure(p.f(), root, depth);
    const double gap = lhs.upper - (near_level.upper + near_pole.upper + 4 * res);
    worst = std::max(worst, gap);
    if (gap > 0) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations over 10 (E, eps) pairs, worst gap " + fmt(worst)};
}

Outcome product_law() {
  const auto spec = oracle::maryland_spec(0.0);
  double worst = 0.0;
  for (std::int64_t N : {1, 7, 64, 200, 512})
    for (double E : {0.0, 0.8, -40.0})
      for (double x : {0.05, 0.3141}) {
        const Matrix B = bounded_factor(spec, TorusPoint(x), IndexWindow::first(N), E);
        const double got = logdet(B).logabs;
        hadamard.record(got, hadamard_log_bound(B));
        double sum = 0.0;
        for (std::int64_t n = 0; n < N; ++n) {
          const double y = oracle::exact_orbit(x, kGolden, n);
          const double s2 = std::sin(2 * std::numbers::pi * y), c2 = std::cos(2 * std::numbers::pi * y);
          sum += std::log(std::abs(s2 - E * (1 + c2)) / std::sqrt(1 + E * E));
        }
        worst = std::max(worst, std::abs(got - sum) / std::max(1.0, std::abs(sum)));
      }
  const auto r = green(spec, TorusPoint(0.3141), IndexWindow::first(512), 0.8);
  hadamard.record(r.logdet_B, r.hadamard_B);
  return {worst <= 1e-10, "max |logdet_B - sum log|g-Ef|/sqrt(1+E^2)| = " + fmt(worst) + " (tol 1e-10), N up to 512"};
}

Outcome ldt_monotonicity() {
  const auto spec = oracle::maryland_spec(0.05);
  const std::vector<std::int64_t> Ms{50, 100, 200};
  const auto reps = ldt_scan(spec, 0.0, 32, Ms, 2048, 0.05);
  const bool mono = reps[0].bad_fraction >= reps[1].bad_fraction && reps[1].bad_fraction >= reps[2].bad_fraction;
  Baseline now;
  for (const auto& r : reps) now.emplace_back("bad_fraction_M" + std::to_string(r.M), r.bad_fraction);
  now.emplace_back("mean_u", reps[0].mean);
  const std::string golden = check_baseline("ldt_fractions.csv", now);
  return {mono && golden.empty(), "bad fractions " + fmt(reps[0].bad_fraction) + " >= " + fmt(reps[1].bad_fraction) +
                                      " >= " + fmt(reps[2].bad_fraction) +
                                      (golden.empty() ? ", baseline ok" : ", baseline mismatch: " + golden)};
}

Outcome resolvent_identity() {
  const auto spec = oracle::maryland_spec(0.05);
  const auto pipe = patch_pipeline(spec, TorusPoint(0.1), 0.0, 128, 32);
  const auto& r = pipe.report;
  for (const auto& child : pipe.paving.children)
    hadamard.record(bounded_factor(spec, pipe.phase, child, 0.0));
  // A second, independent patch on the shifted phase with a fixed rate.
  const auto p2 = pave(IndexWindow::first(128), 32);
  const double slack2 = minimal_slack(spec, TorusPoint(0.37), 0.3, p2, 0.5);
  const auto r2 = patch_check(spec, TorusPoint(0.37), 0.3, p2, 0.5, slack2);
  const double residual = std::max(r.resolvent_residual, r2.resolvent_residual);
  const bool conclusions = r.conclusions_hold() && r2.conclusions_hold();
  const std::string golden = check_baseline("patch_pipeline.csv", {{"shift", static_cast<double>(pipe.shift)},
                                                                   {"c0", r.c0},
                                                                   {"slack", r.slack},
                                                                   {"parent_max_entry", r.parent_max_entry},
                                                                   {"decay_worst_margin", r.decay_worst_margin}});
  return {residual <= 1e-8 && conclusions && golden.empty(),
          "residual " + fmt(residual) + " (tol 1e-8), c0 " + fmt(r.c0) + ", slack " + fmt(r.slack) +
              ", max-entry and half-rate conclusions " + (conclusions ? "hold" : "FAIL") +
              (golden.empty() ? ", baseline ok" : ", baseline mismatch: " + golden)};
}

Outcome localization_experiment() {
  const auto spec = oracle::maryland_spec(0.05);
  const auto rep = eigen_decay(spec, TorusPoint(0.1), 200);
  const double frac = localized_fraction(rep);
  std::int64_t interior = 0;
  Baseline now;
  for (const auto& p : rep.pairs) {
    interior += p.interior ? 1 : 0;
    now.emplace_back("center_" + std::to_string(p.center), p.decay_c);
  }
  const std::string golden = check_baseline("localize_decay_c.csv", now);
  const bool pass = frac >= 0.9 && rep.max_residual <= 1e-8 && golden.empty();
  return {pass, "localized fraction " + fmt(frac) + " of " + std::to_string(interior) +
                    " interior pairs (need >= 0.9), max residual " + fmt(rep.max_residual) + " (tol 1e-8)" +
                    (golden.empty() ? ", decay_c baseline ok" : ", baseline mismatch: " + golden)};
}

Outcome determinism() {
  const std::string config = R"([model]
g = [(1, 0, -0.5)]
f = [(0, 1, 0), (1, 0.5, 0)]
eps = 0.05
omega = 0.6180339887498949
a = 0.1
A = 1
rho = 1.0
kernel_amplitude = 0.5
kernel_cutoff = 16

[experiment]
seed = 5
E = 0
energies = [0, 0.7]
x = 0.1
N = 32
M = 8
Ms = [10, 20, 40]
x_grid = 512
trials = 4
grid = 80
eps_list = [1e-4, 1e-3, 1e-2, 1e-1]
depth = 16
N_ladder = [16, 32]
N1 = 256
j_stride = 16
K = 2000
)";
  const auto cfg = cli::parse_config(config);
  std::vector<std::string> differing;
  for (const auto& name : cli::subcommands()) {
    parallel::set_workers(1);
    const auto one = cli::run_command(name, cfg);
    parallel::set_workers(4);
    const auto four = cli::run_command(name, cfg);
    if (one.csv.str() != four.csv.str() ||
        cli::make_summary(name, cfg, one).dump(2) != cli::make_summary(name, cfg, four).dump(2))
      differing.push_back(name);
  }
  parallel::set_workers(0);
  std::string list;
  for (const auto& d : differing) list += " " + d;
  return {differing.empty(), std::to_string(cli::subcommands().size()) + " subcommands, 1 vs 4 workers, " +
                                 (differing.empty() ? std::string("all byte-identical") : "differ:" + list)};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds, 0 = none
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "factorization identity", 10, factorization_identity},
      {2, "bounded-entry law", 0, bounded_entries},
      {3, "Green oracle equivalence", 0, green_oracle},
      {4, "Cramer identity", 0, cramer_identity},
      {5, "Cartan verification", 60, cartan_verification},
      {6, "Lojasiewicz exponents", 0, lojasiewicz_exponents},
      {7, "sublevel chain inequality", 0, chain_inequality},
      {8, "determinant product law", 0, product_law},
      {10, "LDT monotonicity", 120, ldt_monotonicity},
      {11, "resolvent identity", 0, resolvent_identity},
      {12, "localization experiment", 120, localization_experiment},
      {13, "determinism", 0, determinism},
      // Runs last: it audits every window the criteria above computed.
      {9, "Hadamard ceiling", 0,
       [] {
         return Outcome{hadamard.violations == 0 && hadamard.windows > 0,
                        std::to_string(hadamard.violations) + " violations over " + std::to_string(hadamard.windows) +
                            " windows"};
       }},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string detail = o.detail + "; " + fmt(secs) + " s";
    if (c.time_limit > 0) {
      detail += " (limit " + fmt(c.time_limit) + " s)";
      o.pass = o.pass && secs < c.time_limit;
    }
    if (!o.pass) ++failures;
    char head[96];
    std::snprintf(head, sizeof head, "%s %2d %s: ", o.pass ? "PASS" : "FAIL", c.id, c.name);
    lines.emplace_back(c.id, head + detail);
    std::fprintf(stderr, "  finished %d (%s s)\n", c.id, fmt(secs).c_str());
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
