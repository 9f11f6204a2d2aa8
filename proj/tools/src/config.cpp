#include "qplab_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "qplab/error.hpp"
#include "qplab/sublevel.hpp"

namespace qplab::cli {

namespace {

using Tuple = std::vector<double>;

struct Value {
  std::variant<double, bool, std::string, std::vector<double>, std::vector<Tuple>> data;
  int line = 0;
  std::string key;
};

[[noreturn]] void fail(int line, const std::string& key, const std::string& msg) {
  std::string where = "line " + std::to_string(line);
  if (!key.empty()) where += ", key '" + key + "'";
  throw Error(ErrorKind::ConfigError, where + ": " + msg);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> to_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data() + (s.front() == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(' || ch == '[') ++depth;
    if (ch == ')' || ch == ']') --depth;
    if (ch == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

Value parse_value(const std::string& raw, int line, const std::string& key) {
  Value v;
  v.line = line;
  v.key = key;
  if (raw.empty()) fail(line, key, "missing value");
  if (raw.front() == '[') {
    if (raw.back() != ']') fail(line, key, "unterminated list");
    const std::string body = trim(std::string_view(raw).substr(1, raw.size() - 2));
    const auto items = split_top(body, ',');
    const bool tuples = body.find('(') != std::string::npos;
    if (tuples) {
      std::vector<Tuple> out;
      for (const auto& item : items) {
        if (item.size() < 2 || item.front() != '(' || item.back() != ')')
          fail(line, key, "expected a tuple (n, re, im), got '" + item + "'");
        Tuple t;
        for (const auto& part : split_top(item.substr(1, item.size() - 2), ',')) {
          const auto num = to_number(part);
          if (!num) fail(line, key, "not a number: '" + part + "'");
          t.push_back(*num);
        }
        out.push_back(std::move(t));
      }
      v.data = std::move(out);
    } else {
      std::vector<double> out;
      for (const auto& item : items) {
        const auto num = to_number(item);
        if (!num) fail(line, key, "not a number: '" + item + "'");
        out.push_back(*num);
      }
      v.data = std::move(out);
    }
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.data = raw == "true";
    return v;
  }
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    v.data = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (const auto num = to_number(raw)) {
    v.data = *num;
    return v;
  }
  v.data = raw;
  return v;
}

using Section = std::map<std::string, Value>;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"model",
       {"g", "f", "kernel", "rho", "kernel_amplitude", "kernel_cutoff", "eps", "omega", "a", "A",
        "max_denominator", "normalize"}},
      {"experiment",
       {"seed", "workers", "f_min", "E", "energies", "x", "N", "M", "Ms", "x_grid", "threshold", "c_tilde",
        "margin_floor", "eps_list", "depth", "measure", "trials", "grid", "max_zeros", "max_poles", "R", "R2", "H",
        "Hp", "delta_pole", "c0", "slack", "slack_ratio", "N_ladder", "N1", "delta", "j_stride", "energy_lo",
        "energy_hi", "K", "cf_depth"}},
      {"output", {"dir", "timing"}},
  };
  return keys;
}

// Typed access with range checks. Every getter names the key on failure.
class Reader {
 public:
  explicit Reader(const Section& s) : s_(s) {}

  const Value* find(const std::string& key) const {
    const auto it = s_.find(key);
    return it == s_.end() ? nullptr : &it->second;
  }

  double number(const std::string& key, double fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* d = std::get_if<double>(&v->data)) return *d;
    fail(v->line, key, "expected a number");
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    const double d = number(key, 0.0);
    if (d != std::floor(d) || std::abs(d) > 9.0e15) fail(v->line, key, "expected an integer");
    return static_cast<std::int64_t>(d);
  }

  bool boolean(const std::string& key, bool fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* b = std::get_if<bool>(&v->data)) return *b;
    fail(v->line, key, "expected true or false");
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* s = std::get_if<std::string>(&v->data)) return *s;
    fail(v->line, key, "expected a string");
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* l = std::get_if<std::vector<double>>(&v->data)) return *l;
    fail(v->line, key, "expected a list of numbers");
  }

  std::vector<std::int64_t> integers(const std::string& key, std::vector<std::int64_t> fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    std::vector<std::int64_t> out;
    for (double d : numbers(key, {})) {
      if (d != std::floor(d)) fail(v->line, key, "expected a list of integers");
      out.push_back(static_cast<std::int64_t>(d));
    }
    return out;
  }

  std::vector<FourierTerm> terms(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return {};
    const auto* l = std::get_if<std::vector<Tuple>>(&v->data);
    if (!l) fail(v->line, key, "expected a list of (n, re, im) tuples");
    std::vector<FourierTerm> out;
    for (const auto& t : *l) {
      if (t.size() != 3 || t[0] != std::floor(t[0])) fail(v->line, key, "tuples must be (integer n, re, im)");
      out.push_back({static_cast<int>(t[0]), cplx(t[1], t[2])});
    }
    return out;
  }

  void require(const std::string& key, const std::string& section) const {
    if (!find(key)) fail(0, key, "missing required key in [" + section + "]");
  }

  int line(const std::string& key) const {
    const Value* v = find(key);
    return v ? v->line : 0;
  }

 private:
  const Section& s_;
};

void check(const Reader& r, const std::string& key, bool ok, const std::string& rule) {
  if (!ok) fail(r.line(key), key, key + " must be " + rule);
}

std::string strip_kind(const Error& e) {
  const std::string w = e.what();
  const auto pos = w.find(": ");
  return pos == std::string::npos ? w : w.substr(pos + 2);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in(text);
  std::string raw_line;
  int line_no = 0;
  std::string pending_key, pending_value;
  int pending_line = 0;
  int bracket_depth = 0;

  auto commit = [&] {
    auto& sec = sections[current];
    if (sec.count(pending_key)) fail(pending_line, pending_key, "duplicate key");
    sec.emplace(pending_key, parse_value(trim(pending_value), pending_line, pending_key));
    pending_key.clear();
    pending_value.clear();
  };

  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = raw_line;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (!pending_key.empty()) {
      pending_value += " " + line;
      bracket_depth += static_cast<int>(std::count(line.begin(), line.end(), '[')) -
                       static_cast<int>(std::count(line.begin(), line.end(), ']'));
      if (bracket_depth <= 0) commit();
      continue;
    }
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_keys().count(current)) fail(line_no, "", "unknown section [" + current + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "", "expected 'key = value'");
    if (current.empty()) fail(line_no, "", "key outside of any section");
    pending_key = trim(std::string_view(line).substr(0, eq));
    pending_value = trim(std::string_view(line).substr(eq + 1));
    pending_line = line_no;
    if (pending_key.empty()) fail(line_no, "", "empty key");
    if (!known_keys().at(current).count(pending_key))
      fail(line_no, pending_key, "unknown key in [" + current + "]");
    bracket_depth = static_cast<int>(std::count(pending_value.begin(), pending_value.end(), '[')) -
                    static_cast<int>(std::count(pending_value.begin(), pending_value.end(), ']'));
    if (bracket_depth <= 0) commit();
  }
  if (!pending_key.empty()) fail(pending_line, pending_key, "unterminated list");

  RunConfig cfg;
  cfg.text = text;

  const Reader m(sections["model"]);
  for (const char* key : {"g", "f", "eps", "omega"}) m.require(key, "model");
  auto& model = cfg.model;
  model.g = m.terms("g");
  model.f = m.terms("f");
  model.kernel = m.terms("kernel");
  model.rho = m.number("rho", model.rho);
  model.kernel_amplitude = m.number("kernel_amplitude", model.kernel_amplitude);
  model.kernel_cutoff = static_cast<int>(m.integer("kernel_cutoff", model.kernel_cutoff));
  model.eps = m.number("eps", model.eps);
  model.omega = m.number("omega", model.omega);
  model.a = m.number("a", model.a);
  model.A = m.number("A", model.A);
  model.max_denominator = m.integer("max_denominator", model.max_denominator);
  model.normalize = m.boolean("normalize", model.normalize);
  check(m, "eps", model.eps >= 0.0, "≥ 0");
  check(m, "eps", model.eps < 1.0, "< 1");
  check(m, "rho", model.rho > 0.0, "> 0");
  check(m, "omega", model.omega > 0.0 && model.omega < 1.0, "in (0, 1)");
  check(m, "a", model.a > 0.0, "> 0");
  check(m, "A", model.A >= 1.0, "≥ 1");
  check(m, "kernel_cutoff", model.kernel_cutoff >= 0, "≥ 0");
  check(m, "kernel_amplitude",
        model.kernel_amplitude > 0.0 && model.kernel_amplitude < 1.0, "in (0, 1)");
  check(m, "max_denominator", model.max_denominator >= 1, "≥ 1");

  const Reader x(sections["experiment"]);
  x.require("seed", "experiment");
  auto& e = cfg.experiment;
  const auto seed = x.integer("seed", 0);
  check(x, "seed", seed >= 0, "≥ 0");
  e.seed = static_cast<std::uint64_t>(seed);
  const auto workers = x.integer("workers", 0);
  check(x, "workers", workers >= 0 && workers <= 1024, "in [0, 1024]");
  e.workers = static_cast<unsigned>(workers);
  e.f_min = x.number("f_min", e.f_min);
  check(x, "f_min", e.f_min > 0.0, "> 0");
  e.E = x.number("E", e.E);
  e.energies = x.numbers("energies", {e.E});
  check(x, "energies", !e.energies.empty(), "non-empty");
  e.x = x.number("x", e.x);
  check(x, "x", e.x >= 0.0 && e.x < 1.0, "in [0, 1)");
  e.N = x.integer("N", e.N);
  check(x, "N", e.N >= 1 && e.N <= 4096, "in [1, 4096]");
  e.M = x.integer("M", e.M);
  check(x, "M", e.M >= 1 && e.M <= e.N, "in [1, N]");
  e.Ms = x.integers("Ms", e.Ms);
  check(x, "Ms", !e.Ms.empty() && std::all_of(e.Ms.begin(), e.Ms.end(), [](auto v) { return v >= 1; }),
        "a non-empty list of integers ≥ 1");
  e.x_grid = x.integer("x_grid", e.x_grid);
  check(x, "x_grid", e.x_grid >= 1, "≥ 1");
  e.threshold = x.number("threshold", e.threshold);
  check(x, "threshold", e.threshold > 0.0, "> 0");
  e.c_tilde = x.number("c_tilde", e.c_tilde);
  check(x, "c_tilde", e.c_tilde == 0.0 || e.c_tilde > 1.0, "0 (automatic) or > 1");
  e.margin_floor = x.number("margin_floor", e.margin_floor);
  e.eps_list = x.numbers("eps_list", default_eps_list());
  check(x, "eps_list", std::all_of(e.eps_list.begin(), e.eps_list.end(), [](double v) { return v > 0.0; }),
        "a list of positive numbers");
  e.depth = static_cast<int>(x.integer("depth", e.depth));
  check(x, "depth", e.depth >= 1 && e.depth <= kMaxSublevelDepth, "in [1, 24]");
  e.measure = x.string("measure", e.measure);
  check(x, "measure", e.measure == "potential" || e.measure == "linear", "potential or linear");
  e.trials = static_cast<int>(x.integer("trials", e.trials));
  check(x, "trials", e.trials >= 1, "≥ 1");
  e.grid = static_cast<int>(x.integer("grid", e.grid));
  check(x, "grid", e.grid >= 2, "≥ 2");
  e.max_zeros = static_cast<int>(x.integer("max_zeros", e.max_zeros));
  e.max_poles = static_cast<int>(x.integer("max_poles", e.max_poles));
  check(x, "max_zeros", e.max_zeros >= 0, "≥ 0");
  check(x, "max_poles", e.max_poles >= 0, "≥ 0");
  e.R = x.number("R", e.R);
  e.R2 = x.number("R2", e.R2);
  check(x, "R2", e.R2 > 0.0 && e.R2 < e.R, "in (0, R)");
  e.H = x.number("H", e.H);
  e.Hp = x.number("Hp", e.Hp);
  check(x, "H", e.H > 0.0, "> 0");
  check(x, "Hp", e.Hp > 0.0, "> 0");
  e.delta_pole = x.number("delta_pole", e.delta_pole);
  check(x, "delta_pole", e.delta_pole > 0.0 && e.delta_pole < e.R, "in (0, R)");
  if (x.find("c0")) {
    e.c0 = x.number("c0", 0.0);
    check(x, "c0", *e.c0 > 0.0, "> 0");
  }
  if (x.find("slack")) e.slack = x.number("slack", 0.0);
  e.slack_ratio = x.number("slack_ratio", e.slack_ratio);
  e.N_ladder = x.integers("N_ladder", e.N_ladder);
  check(x, "N_ladder",
        !e.N_ladder.empty() && std::all_of(e.N_ladder.begin(), e.N_ladder.end(), [](auto v) { return v >= 1; }),
        "a non-empty list of integers ≥ 1");
  e.N1 = x.integer("N1", e.N1);
  check(x, "N1", e.N1 >= 1, "≥ 1");
  e.delta = x.number("delta", e.delta);
  check(x, "delta", e.delta > 0.0 && e.delta < 1.0, "in (0, 1)");
  e.j_stride = x.integer("j_stride", e.j_stride);
  check(x, "j_stride", e.j_stride >= 0, "≥ 0");
  if (x.find("energy_lo") || x.find("energy_hi")) {
    const double lo = x.number("energy_lo", -std::numeric_limits<double>::infinity());
    const double hi = x.number("energy_hi", std::numeric_limits<double>::infinity());
    check(x, "energy_hi", lo <= hi, "≥ energy_lo");
    e.energy_window = std::pair{lo, hi};
  }
  e.K = x.integer("K", e.K);
  check(x, "K", e.K >= 1, "≥ 1");
  e.cf_depth = static_cast<int>(x.integer("cf_depth", e.cf_depth));
  check(x, "cf_depth", e.cf_depth >= 1 && e.cf_depth <= 60, "in [1, 60]");

  const Reader o(sections["output"]);
  cfg.output.dir = o.string("dir", cfg.output.dir);
  cfg.output.timing = o.boolean("timing", cfg.output.timing);

  // Build the operator once so coefficient invariants surface as config errors.
  try {
    (void)make_spec(cfg);
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::ConfigError) throw;
    std::string key = "g";
    switch (err.kind()) {
      case ErrorKind::KernelDecay: key = "kernel"; break;
      case ErrorKind::RationalInput: key = "omega"; break;
      default: break;
    }
    if (err.kind() == ErrorKind::KernelDecay && !m.find("kernel")) key = "kernel_amplitude";
    fail(m.line(key), key, strip_kind(err));
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

OperatorSpec make_spec(const RunConfig& cfg) {
  const auto& m = cfg.model;
  ToeplitzKernel kernel = m.kernel.empty()
                              ? ToeplitzKernel::exponential(m.rho, m.kernel_amplitude, m.kernel_cutoff)
                              : ToeplitzKernel(m.kernel, m.rho);
  MeromorphicPotential potential(TrigPolynomial::from_terms(m.g), TrigPolynomial::from_terms(m.f));
  if (m.normalize) potential = potential.normalized();
  Frequency freq(m.omega, m.a, m.A, m.max_denominator);
  return OperatorSpec(std::move(potential), std::move(kernel), m.eps, freq, cfg.experiment.f_min);
}

}  // namespace qplab::cli
