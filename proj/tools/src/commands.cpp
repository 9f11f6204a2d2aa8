#include "qplab_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "qplab/cartan.hpp"
#include "qplab/error.hpp"
#include "qplab/localization.hpp"
#include "qplab/sublevel.hpp"

namespace qplab::cli {

namespace {

using Runner = std::function<void(const RunConfig&, CommandResult&)>;

// JSON has no infinities; they are written as strings so the value survives.
Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

std::string ctx(const std::string& what, double value) { return what + "=" + format_number(value); }

// Runs fn; a library error becomes a violation tagged with the context.
template <class Fn>
bool guarded(CommandResult& r, const std::string& context, Fn&& fn) {
  try {
    fn();
    return true;
  } catch (const Error& e) {
    r.violations.push_back(context + ": " + e.what());
    return false;
  }
}

void run_green(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  const OperatorSpec spec = make_spec(cfg);
  const IndexWindow w = IndexWindow::first(e.N);
  const TorusPoint x(e.x);
  const EntryBounds bounds = entry_bounds(spec);
  r.csv = CsvTable({"E", "n", "np", "G"});
  Json windows = Json::array();
  for (double E : e.energies) {
    guarded(r, "green " + ctx("E", E) + " " + ctx("x", e.x), [&] {
      const GreenResult g = green(spec, x, w, E);
      for (Eigen::Index i = 0; i < g.G.rows(); ++i)
        for (Eigen::Index j = 0; j < g.G.cols(); ++j)
          r.csv.add_row({E, static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), g.G(i, j)});

      Json out = Json::object();
      out["E"] = E;
      out["logdet_B"] = num(g.logdet_B);
      out["sign_B"] = g.sign_B;
      out["hadamard_B"] = num(g.hadamard_B);
      out["max_entry"] = num(g.max_entry);
      if (g.decay) {
        out["c_eff"] = num(g.decay->c_eff);
        out["offset"] = num(g.decay->offset);
        out["r2"] = num(g.decay->r2);
        out["fit_pairs"] = g.decay->pairs;
      } else {
        out["c_eff"] = nullptr;
      }
      if (!(g.logdet_B <= g.hadamard_B + 1e-12 * std::max(1.0, std::abs(g.hadamard_B))))
        r.violations.push_back("green " + ctx("E", E) + ": logdet_B exceeds the Hadamard ceiling");

      const double asym = (g.G - g.G.transpose()).cwiseAbs().maxCoeff();
      out["asymmetry"] = num(asym / g.max_entry);
      if (asym > 1e-8 * g.max_entry) r.violations.push_back("green " + ctx("E", E) + ": G is not symmetric");

      const Matrix B = bounded_factor(spec, x, w, E);
      std::int64_t bound_violations = 0;
      for (Eigen::Index i = 0; i < B.rows(); ++i)
        for (Eigen::Index j = 0; j < B.cols(); ++j) {
          const double cap = i == j ? bounds.diagonal
                                    : bounds.coupling * std::exp(-bounds.rho * static_cast<double>(std::abs(i - j)));
          if (std::abs(B(i, j)) > cap * (1.0 + 1e-12)) ++bound_violations;
        }
      out["entry_bound_violations"] = bound_violations;
      if (bound_violations > 0) r.violations.push_back("green " + ctx("E", E) + ": B entries exceed their bounds");

      try {
        const FactorPair fp = factorize(spec, x, w, E);
        const Matrix H = build_window(spec, x, w, E);
        const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
        const double res = (fp.F_diag.asDiagonal() * fp.B - H).cwiseAbs().maxCoeff() / scale;
        out["factor_residual"] = num(res);
        if (res > 1e-10) r.violations.push_back("green " + ctx("E", E) + ": factorization residual too large");
      } catch (const PoleProximityError&) {
        out["factor_residual"] = nullptr;  // H itself is undefined there; B and G are not
      }
      windows.push_back(std::move(out));
    });
  }
  r.results["N"] = e.N;
  r.results["x"] = e.x;
  r.results["windows"] = std::move(windows);
}

void run_shiftscan(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  const OperatorSpec spec = make_spec(cfg);
  r.csv = CsvTable({"E", "m", "logdet_B", "chosen"});
  Json scans = Json::array();
  for (double E : e.energies) {
    guarded(r, "shiftscan " + ctx("E", E) + " " + ctx("x", e.x), [&] {
      const ShiftResult s = good_shift(spec, TorusPoint(e.x), E, e.N);
      for (std::size_t k = 0; k < s.shifts.size(); ++k)
        r.csv.add_row({E, s.shifts[k], s.logdets[k], static_cast<std::int64_t>(s.shifts[k] == s.m)});
      Json out = Json::object();
      out["E"] = E;
      out["m"] = s.m;
      out["logdet_B"] = num(s.green.logdet_B);
      out["c_eff"] = s.green.decay ? num(s.green.decay->c_eff) : Json(nullptr);
      try {
        const GreenResult plain = green(spec, TorusPoint(e.x), IndexWindow::first(e.N), E);
        out["unshifted_c_eff"] = plain.decay ? num(plain.decay->c_eff) : Json(nullptr);
      } catch (const Error&) {
        out["unshifted_c_eff"] = nullptr;
      }
      scans.push_back(std::move(out));
    });
  }
  r.results["N"] = e.N;
  r.results["x"] = e.x;
  r.results["scans"] = std::move(scans);
}

void run_ldt(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  const OperatorSpec spec = make_spec(cfg);
  std::vector<std::int64_t> Ms = e.Ms;
  std::sort(Ms.begin(), Ms.end());
  r.csv = CsvTable({"E", "M", "j", "x", "average", "deviation"});
  const double c_tilde = e.c_tilde > 0.0 ? e.c_tilde : ldt_floor_constant(spec.potential);
  Json scans = Json::array();
  for (double E : e.energies) {
    guarded(r, "ldt " + ctx("E", E), [&] {
      const auto reports = ldt_scan(spec, E, e.N, Ms, e.x_grid, e.threshold, c_tilde);
      Json per_m = Json::array();
      for (const auto& rep : reports) {
        for (std::size_t j = 0; j < rep.averages.size(); ++j) {
          const double xj = (static_cast<double>(j) + 0.5) / static_cast<double>(e.x_grid);
          r.csv.add_row({E, rep.M, static_cast<std::int64_t>(j), xj, rep.averages[j], rep.averages[j] - rep.mean});
        }
        per_m.push_back({{"M", rep.M}, {"bad_fraction", rep.bad_fraction}, {"mean", num(rep.mean)}});
      }
      for (std::size_t k = 1; k < reports.size(); ++k)
        if (reports[k].bad_fraction > reports[k - 1].bad_fraction)
          r.violations.push_back("ldt " + ctx("E", E) + ": bad_fraction increases from M=" +
                                 std::to_string(reports[k - 1].M) + " to M=" + std::to_string(reports[k].M));
      scans.push_back({{"E", E}, {"reports", std::move(per_m)}});
    });
  }
  r.results["N"] = e.N;
  r.results["x_grid"] = e.x_grid;
  r.results["threshold"] = e.threshold;
  r.results["c_tilde"] = c_tilde;
  r.results["scans"] = std::move(scans);
}

void run_avgdet(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  const OperatorSpec spec = make_spec(cfg);
  r.csv = CsvTable({"E", "N", "lhs", "rhs", "margin", "singular_points"});
  for (double E : e.energies) {
    guarded(r, "avgdet " + ctx("E", E), [&] {
      const AvgLogdetReport a = avg_logdet_check(spec, E, e.N, e.x_grid);
      r.csv.add_row({E, e.N, a.lhs, a.rhs, a.margin, a.singular_points});
      if (!(a.margin > e.margin_floor))
        r.violations.push_back("avgdet " + ctx("E", E) + ": margin " + format_number(a.margin) + " below " +
                               format_number(e.margin_floor));
    });
  }
  r.results["N"] = e.N;
  r.results["x_grid"] = e.x_grid;
  r.results["margin_floor"] = e.margin_floor;
}

void run_cartan(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  r.csv = CsvTable({"trial", "zeros", "poles", "logM", "bound", "sampled", "excluded", "checked", "violations",
                    "min_margin"});
  std::int64_t total_violations = 0, total_checked = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < e.trials; ++t) {
    guarded(r, "cartan trial=" + std::to_string(t), [&] {
      const auto c = random_cartan_case(e.seed + static_cast<std::uint64_t>(t), e.max_zeros, e.max_poles, e.R, e.R2,
                                        e.H, e.Hp, e.delta_pole);
      const CartanVerification v =
          verify_cartan([&](cplx z) { return c.fn(z); }, c.input, e.grid);
      r.csv.add_row({static_cast<std::int64_t>(t), static_cast<std::int64_t>(c.input.zeros.size()),
                     static_cast<std::int64_t>(c.input.poles.size()), c.input.logM, v.bound, v.sampled, v.excluded,
                     v.checked, v.violations, v.min_margin});
      total_violations += v.violations;
      total_checked += v.checked;
      worst = std::min(worst, v.min_margin);
      if (v.violations > 0)
        r.violations.push_back("cartan trial=" + std::to_string(t) + ": " + std::to_string(v.violations) +
                               " points below the bound");
    });
  }
  r.results["trials"] = e.trials;
  r.results["grid"] = e.grid;
  r.results["checked"] = total_checked;
  r.results["violations"] = total_violations;
  r.results["min_margin"] = num(worst);
}

void run_sublevel(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  const OperatorSpec spec = make_spec(cfg);
  std::vector<double> eps = e.eps_list;
  std::sort(eps.begin(), eps.end());
  r.csv = CsvTable({"eps", "lower", "upper", "depth", "E"});
  Json fits = Json::array();
  for (double E : e.energies) {
    guarded(r, "sublevel " + ctx("E", E), [&] {
      std::vector<ExponentSample> samples;
      for (double s : eps) {
        const MeasureBracket b = e.measure == "linear" ? normalized_linear_measure(spec.potential, E, s, e.depth)
                                                       : potential_measure(spec.potential, E, s, e.depth);
        r.csv.add_row({s, b.lower, b.upper, static_cast<std::int64_t>(b.depth), E});
        samples.push_back({s, b});
      }
      for (std::size_t k = 1; k < samples.size(); ++k)
        if (samples[k - 1].bracket.lower > samples[k].bracket.upper)
          r.violations.push_back("sublevel " + ctx("E", E) + ": brackets not monotone at eps=" +
                                 format_number(samples[k].eps));
      Json out = {{"E", E}};
      try {
        const ExponentFit fit = fit_exponent(samples);
        out["exponent"] = num(fit.c);
        out["log_K"] = num(fit.log_K);
        out["r2"] = num(fit.r2);
      } catch (const Error&) {
        out["exponent"] = nullptr;
      }
      fits.push_back(std::move(out));
    });
  }
  r.results["measure"] = e.measure;
  r.results["depth"] = e.depth;
  r.results["fits"] = std::move(fits);
}

void run_pave(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  r.csv = CsvTable({"child", "lo", "hi"});
  guarded(r, "pave N=" + std::to_string(e.N) + " M=" + std::to_string(e.M), [&] {
    const Paving p = pave(IndexWindow::first(e.N), e.M);
    for (std::size_t i = 0; i < p.children.size(); ++i)
      r.csv.add_row({static_cast<std::int64_t>(i), p.children[i].lo, p.children[i].hi});
    r.results["children"] = p.children.size();
    r.results["covered"] = covers_with_margin(p);
  });
  r.results["N"] = e.N;
  r.results["M"] = e.M;
}

Json report_json(const PatchReport& p) {
  return {{"c0", num(p.c0)},
          {"slack", num(p.slack)},
          {"children_checked", p.children_checked},
          {"child_worst_margin", num(p.child_worst_margin)},
          {"parent_max_entry", num(p.parent_max_entry)},
          {"max_entry_ceiling", num(p.max_entry_ceiling)},
          {"max_entry_ok", p.max_entry_ok},
          {"decay_pairs", p.decay_pairs},
          {"decay_violations", p.decay_violations},
          {"decay_worst_margin", num(p.decay_worst_margin)},
          {"decay_ok", p.decay_ok},
          {"block_child", p.block_child},
          {"resolvent_residual", num(p.resolvent_residual)},
          {"resolvent_ok", p.resolvent_ok}};
}

void run_patch(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  const OperatorSpec spec = make_spec(cfg);
  r.csv = CsvTable({"child", "lo", "hi", "c_eff", "offset", "r2"});
  const double E = e.energies.front();
  guarded(r, "patch " + ctx("E", E) + " " + ctx("x", e.x), [&] {
    PatchReport rep;
    if (e.c0) {
      const ShiftResult s = good_shift(spec, TorusPoint(e.x), E, e.N);
      const TorusPoint phase(orbit_point(e.x, spec.omega(), s.m));
      const Paving p = pave(IndexWindow::first(e.N), e.M);
      const double slack = e.slack ? *e.slack : minimal_slack(spec, phase, E, p, *e.c0);
      for (std::size_t i = 0; i < p.children.size(); ++i) {
        const GreenResult g = green(spec, phase, p.children[i], E);
        r.csv.add_row({static_cast<std::int64_t>(i), p.children[i].lo, p.children[i].hi,
                       g.decay ? g.decay->c_eff : std::nan(""), g.decay ? g.decay->offset : std::nan(""),
                       g.decay ? g.decay->r2 : std::nan("")});
      }
      rep = patch_check(spec, phase, E, p, *e.c0, slack);
      r.results["shift"] = s.m;
    } else {
      const PatchPipeline pp = patch_pipeline(spec, TorusPoint(e.x), E, e.N, e.M);
      for (std::size_t i = 0; i < pp.paving.children.size(); ++i)
        r.csv.add_row({static_cast<std::int64_t>(i), pp.paving.children[i].lo, pp.paving.children[i].hi,
                       pp.child_fits[i].c_eff, pp.child_fits[i].offset, pp.child_fits[i].r2});
      rep = pp.report;
      r.results["shift"] = pp.shift;
    }
    r.results["report"] = report_json(rep);
    if (!rep.resolvent_ok) r.violations.push_back("patch: resolvent identity residual above tolerance");
    if (!rep.max_entry_ok) r.violations.push_back("patch: parent max entry above 2 e^{c0 slack}");
    if (!rep.decay_ok) r.violations.push_back("patch: parent misses the half-rate decay bound");
  });
  r.results["N"] = e.N;
  r.results["M"] = e.M;
  r.results["E"] = E;
}

double ladder_slack(const ExperimentConfig& e, std::int64_t N) {
  return e.slack ? *e.slack : e.slack_ratio * static_cast<double>(N);
}

void run_badset(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  const OperatorSpec spec = make_spec(cfg);
  const double E = e.energies.front();
  const double c0 = e.c0.value_or(0.5);
  std::vector<std::int64_t> ladder = e.N_ladder;
  std::sort(ladder.begin(), ladder.end());
  r.csv = CsvTable({"N", "j", "x", "flagged", "shift"});
  std::vector<BadSet> sets;
  Json per_n = Json::array();
  for (std::int64_t N : ladder) {
    guarded(r, "badset N=" + std::to_string(N) + " " + ctx("E", E), [&] {
      BadSet b = bad_set(spec, E, N, e.x_grid, c0, ladder_slack(e, N));
      for (std::size_t j = 0; j < b.flagged.size(); ++j)
        r.csv.add_row({N, static_cast<std::int64_t>(j), (static_cast<double>(j) + 0.5) / static_cast<double>(b.grid),
                       static_cast<std::int64_t>(b.flagged[j]), b.shift[j]});
      per_n.push_back({{"N", N}, {"slack", ladder_slack(e, N)}, {"flagged", b.count()}, {"fraction", b.fraction}});
      sets.push_back(std::move(b));
    });
  }
  for (std::size_t k = 1; k < sets.size(); ++k)
    if (sets[k].fraction > sets[k - 1].fraction)
      r.violations.push_back("badset: fraction increases from N=" + std::to_string(sets[k - 1].N) + " to N=" +
                             std::to_string(sets[k].N));
  r.results["E"] = E;
  r.results["c0"] = c0;
  r.results["grid"] = e.x_grid;
  r.results["ladder"] = std::move(per_n);
  if (const auto fit = fit_bad_set_exponent(sets))
    r.results["sigma_fit"] = {{"sigma", num(fit->sigma)}, {"log_c", num(fit->log_c)}, {"points", fit->points}};
  else
    r.results["sigma_fit"] = nullptr;
}

void run_orbit(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  const OperatorSpec spec = make_spec(cfg);
  const double E = e.energies.front();
  const double c0 = e.c0.value_or(0.5);
  r.csv = CsvTable({"k", "x", "flagged"});
  guarded(r, "orbit N=" + std::to_string(e.N) + " " + ctx("E", E), [&] {
    const BadSet b = bad_set(spec, E, e.N, e.x_grid, c0, ladder_slack(e, e.N));
    const OrbitCount c = orbit_count(b, TorusPoint(e.x), spec.freq, e.N1, e.delta);
    for (std::int64_t k = 1; k <= e.N1; ++k) {
      const double xk = orbit_point(e.x, spec.omega(), k);
      const auto cell = std::min<std::int64_t>(b.grid - 1, static_cast<std::int64_t>(std::floor(xk * b.grid)));
      r.csv.add_row({k, xk, static_cast<std::int64_t>(b.flagged[static_cast<std::size_t>(cell)])});
    }
    r.results["bad_fraction"] = b.fraction;
    r.results["count"] = c.count;
    r.results["reference"] = num(c.reference);
    r.results["ratio"] = num(c.ratio);
    r.results["degenerate"] = c.degenerate;
    if (c.degenerate) r.violations.push_back("orbit: every orbit point lands in the bad set");
  });
  r.results["qualitative"] = true;
  r.results["N"] = e.N;
  r.results["N1"] = e.N1;
  r.results["delta"] = e.delta;
}

void run_localize(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  const OperatorSpec spec = make_spec(cfg);
  r.csv = CsvTable({"E", "center", "decay_c", "decay_r2", "residual", "interior"});
  guarded(r, "localize N=" + std::to_string(e.N) + " " + ctx("x", e.x), [&] {
    const EigenReport rep = eigen_decay(spec, TorusPoint(e.x), e.N, e.energy_window);
    std::int64_t interior = 0;
    for (const auto& p : rep.pairs) {
      r.csv.add_row({p.E, p.center, p.decay_c, p.decay_r2, p.residual, static_cast<std::int64_t>(p.interior)});
      interior += p.interior ? 1 : 0;
    }
    r.results["pairs"] = rep.pairs.size();
    r.results["interior_pairs"] = interior;
    r.results["localized_fraction"] = localized_fraction(rep);
    r.results["max_residual"] = num(rep.max_residual);
    r.results["max_overlap"] = num(rep.max_overlap);
    if (rep.max_overlap > 1e-8) r.violations.push_back("localize: eigenvectors not orthogonal to 1e-8");
    if (e.j_stride > 0) {
      const auto nested = nested_spectra(spec, TorusPoint(e.x), e.N1, e.j_stride);
      Json lists = Json::array();
      for (const auto& s : nested) lists.push_back({{"j", s.j}, {"energies", s.energies}});
      const auto bad = interlacing_violations(nested);
      r.results["nested_spectra"] = std::move(lists);
      r.results["interlacing_violations"] = bad;
      if (bad > 0) r.violations.push_back("localize: nested spectra violate interlacing");
    }
  });
  r.results["N"] = e.N;
  r.results["x"] = e.x;
}

void run_dioph(const RunConfig& cfg, CommandResult& r) {
  const auto& e = cfg.experiment;
  const OperatorSpec spec = make_spec(cfg);
  const Frequency& f = spec.freq;
  r.csv = CsvTable({"k", "a", "p", "q", "err", "ratio"});
  guarded(r, "dioph " + ctx("omega", f.omega()), [&] {
    const ConvergentList cf = continued_fraction(f.omega(), e.cf_depth);
    for (std::size_t k = 0; k < cf.size(); ++k) {
      const auto& c = cf[k];
      const double q = static_cast<double>(c.q);
      const double ratio = torus_dist(orbit_point(0.0, f.omega(), c.q)) * std::pow(q, f.A()) / f.a();
      r.csv.add_row({static_cast<std::int64_t>(k + 1), c.a, c.p, c.q, c.err, ratio});
    }
  });
  const DiophantineReport d = diophantine_check(f, e.K);
  r.results["omega"] = f.omega();
  r.results["a"] = f.a();
  r.results["A"] = f.A();
  r.results["K"] = d.K;
  r.results["pass"] = d.pass;
  r.results["first_violation"] = d.first_violation;
  r.results["worst_ratio"] = num(d.worst_ratio);
  r.results["worst_k"] = d.worst_k;
  if (!d.pass)
    r.violations.push_back("dioph: ||k omega|| <= a k^-A first at k=" + std::to_string(d.first_violation));
}

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"green", run_green},     {"shiftscan", run_shiftscan}, {"ldt", run_ldt},     {"avgdet", run_avgdet},
      {"cartan", run_cartan},   {"sublevel", run_sublevel},   {"pave", run_pave},   {"patch", run_patch},
      {"badset", run_badset},   {"orbit", run_orbit},         {"localize", run_localize}, {"dioph", run_dioph},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"green", "shiftscan", "ldt",    "avgdet", "cartan",   "sublevel",
                                              "pave",  "patch",     "badset", "orbit",  "localize", "dioph"};
  return names;
}

CommandResult run_command(const std::string& name, const RunConfig& cfg) {
  const auto it = runners().find(name);
  if (it == runners().end()) throw Error(ErrorKind::ConfigError, "unknown subcommand '" + name + "'");
  CommandResult r;
  try {
    it->second(cfg, r);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    r.violations.push_back(name + ": " + e.what());
  }
  return r;
}

Json make_summary(const std::string& name, const RunConfig& cfg, const CommandResult& r) {
  Json s = Json::object();
  s["tool"] = "qplab";
  s["version"] = kToolVersion;
  s["subcommand"] = name;
  s["config_hash"] = config_hash(cfg.text);
  s["config"] = cfg.text;
  s["csv_rows"] = r.csv.rows();
  s["results"] = r.results;
  s["violations"] = r.violations;
  s["ok"] = r.violations.empty();
  return s;
}

}  // namespace qplab::cli
