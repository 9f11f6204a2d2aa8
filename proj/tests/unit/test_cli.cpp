#include <string>

#include "doctest.h"
#include "qplab/error.hpp"
#include "qplab/parallel.hpp"
#include "qplab_cli/commands.hpp"
#include "qplab_cli/config.hpp"
#include "qplab_cli/output.hpp"

using namespace qplab;
using namespace qplab::cli;

namespace {

const std::string kModel = R"([model]
g = [(1, 0, -0.5)]
f = [(0, 1, 0), (1, 0.5, 0)]
eps = 0.05
omega = 0.6180339887498949
a = 0.1
A = 1
)";

std::string config_error(const std::string& text) {
  try {
    (void)make_spec(parse_config(text));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    return e.what();
  }
  FAIL("config accepted: " << text);
  return {};
}

}  // namespace

TEST_CASE("minimal Maryland config") {
  const auto cfg = parse_config(kModel + "[experiment]\nseed = 3\n");
  CHECK(cfg.model.eps == 0.05);
  CHECK(cfg.experiment.seed == 3);
  const auto spec = make_spec(cfg);
  CHECK(spec.omega() == 0.6180339887498949);
  CHECK(spec.potential.g()(0.25) == doctest::Approx(1.0));
  CHECK(spec.kernel.at(1) == doctest::Approx(0.5 * std::exp(-1.0)));
}

TEST_CASE("config errors name the key") {
  std::string text = kModel + "[experiment]\nseed = 1\n";
  text.replace(text.find("eps = 0.05"), 10, "eps = -0.1");
  const auto msg = config_error(text);
  CHECK(msg.find("eps must be ≥ 0") != std::string::npos);
  CHECK(msg.find("line 4") != std::string::npos);

  const auto decay = config_error(kModel + "kernel = [(3, 1, 0)]\nrho = 1\n[experiment]\nseed = 1\n");
  CHECK(decay.find("kernel decay violated at n=3") != std::string::npos);
  CHECK(decay.find("key 'kernel'") != std::string::npos);

  CHECK(config_error(kModel + "colour = 3\n[experiment]\nseed = 1\n").find("colour") != std::string::npos);
  CHECK(config_error(kModel + "[experiment]\nN = 4\n").find("seed") != std::string::npos);
  CHECK(config_error(kModel + "eps = 0.1\n[experiment]\nseed = 1\n").find("duplicate") != std::string::npos);
  std::string rational = kModel + "[experiment]\nseed = 1\n";
  rational.replace(rational.find("0.6180339887498949"), 18, "0.375");
  (void)config_error(rational);
}

TEST_CASE("lists may span lines and comments are ignored") {
  const auto cfg = parse_config(kModel +
                                "[experiment]\nseed = 1  # reproducible\nMs = [10,\n      20,\n      40]\n"
                                "measure = \"linear\"\n[output]\ntiming = false\n");
  CHECK(cfg.experiment.Ms == std::vector<std::int64_t>{10, 20, 40});
  CHECK(cfg.experiment.measure == "linear");
  CHECK_FALSE(cfg.output.timing);
}

TEST_CASE("normalize flag rescales f") {
  const auto cfg = parse_config(kModel + "normalize = true\n[experiment]\nseed = 1\n");
  const auto spec = make_spec(cfg);
  CHECK(std::abs(spec.potential.f()(0.0)) <= 1.0);
  CHECK(spec.potential.g()(0.2) / spec.potential.f()(0.2) == doctest::Approx(std::tan(0.2 * 3.141592653589793)));
}

TEST_CASE("number formatting and CSV tables") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-300) == "1e-300");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_number(std::nan("")) == "nan");
  CsvTable t({"a", "b", "c"});
  t.add_row({0.5, std::int64_t{3}, std::string("x")});
  CHECK(t.str() == "a,b,c\n0.5,3,x\n");
  CHECK_THROWS_AS(t.add_row({0.5}), Error);
}

TEST_CASE("config hash is the git blob hash") {
  CHECK(config_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(config_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("localize and sublevel schemas") {
  auto cfg = parse_config(kModel + "[experiment]\nseed = 1\nN = 100\nx = 0.1\n");
  const auto loc = run_command("localize", cfg);
  CHECK(loc.violations.empty());
  const auto& h = loc.csv.header();
  REQUIRE(h.size() >= 5);
  CHECK(h[0] == "E");
  CHECK(h[1] == "center");
  CHECK(h[2] == "decay_c");
  CHECK(h[3] == "decay_r2");
  CHECK(h[4] == "residual");
  CHECK(loc.csv.rows() == 201);

  cfg = parse_config(kModel +
                     "[experiment]\nseed = 1\neps_list = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.2]\n"
                     "depth = 18\n");
  const auto sub = run_command("sublevel", cfg);
  CHECK(sub.csv.rows() == 10);
  CHECK(sub.csv.header()[0] == "eps");
  CHECK(sub.csv.header()[1] == "lower");
  CHECK(sub.csv.header()[2] == "upper");
  CHECK(sub.csv.header()[3] == "depth");
  CHECK(sub.results.dump().find("exponent") != std::string::npos);

  const auto summary = make_summary("sublevel", cfg, sub);
  CHECK(summary["config_hash"] == config_hash(cfg.text));
  CHECK(summary["csv_rows"] == 10);
  CHECK(summary["ok"] == true);
}

TEST_CASE("unknown subcommand") {
  const auto cfg = parse_config(kModel + "[experiment]\nseed = 1\n");
  CHECK_THROWS_AS(run_command("nope", cfg), Error);
  CHECK(subcommands().size() == 12);
}

TEST_CASE("worker count does not change results") {
  const auto cfg = parse_config(kModel + "[experiment]\nseed = 1\nN = 16\nx_grid = 512\nMs = [10, 20]\n");
  parallel::set_workers(1);
  const auto one = run_command("ldt", cfg);
  parallel::set_workers(4);
  const auto four = run_command("ldt", cfg);
  parallel::set_workers(0);
  CHECK(one.csv.str() == four.csv.str());
  CHECK(make_summary("ldt", cfg, one).dump() == make_summary("ldt", cfg, four).dump());
}
