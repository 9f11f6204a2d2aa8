#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qplab/spectral.hpp"

namespace qplab::cli {

/// Everything the model section can describe: v = g/f, the hopping kernel,
/// the coupling and the rotation number.
struct ModelConfig {
  std::vector<FourierTerm> g;
  std::vector<FourierTerm> f;
  // Explicit kernel coefficients; when empty the exponential family
  // kernel_amplitude * e^{-rho |n|}, 0 < |n| <= kernel_cutoff is used.
  std::vector<FourierTerm> kernel;
  double rho = 1.0;
  double kernel_amplitude = 0.5;
  int kernel_cutoff = 16;
  double eps = 0.05;
  double omega = 0.0;
  double a = 0.1;
  double A = 2.0;
  std::int64_t max_denominator = 1'000'000;
  bool normalize = false;  // rescale g, f so that sup |f| <= 1
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  unsigned workers = 0;
  double f_min = kDefaultFMin;

  double E = 0.0;
  std::vector<double> energies;  // defaults to {E}
  double x = 0.1;
  std::int64_t N = 32;
  std::int64_t M = 8;
  std::vector<std::int64_t> Ms{50, 100, 200};
  std::int64_t x_grid = 2048;
  double threshold = 0.05;
  double c_tilde = 0.0;  // 0 = derive from the potential
  double margin_floor = -0.5;

  std::vector<double> eps_list;  // defaults to 5 per decade over [1e-5, 1e-1]
  int depth = 20;
  std::string measure = "potential";  // potential | linear | pencil

  int trials = 100;
  int grid = 400;
  int max_zeros = 4;
  int max_poles = 4;
  double R = 1.0;
  double R2 = 0.5;
  double H = 0.05;
  double Hp = 0.05;
  double delta_pole = 0.1;

  std::optional<double> c0;
  std::optional<double> slack;
  double slack_ratio = 0.25;
  std::vector<std::int64_t> N_ladder{32, 64, 128};
  std::int64_t N1 = 1024;
  double delta = 0.1;
  std::int64_t j_stride = 0;  // 0 disables nested spectra
  std::optional<std::pair<double, double>> energy_window;

  std::int64_t K = 10000;
  int cf_depth = 20;
};

struct OutputConfig {
  std::string dir = "out";
  bool timing = true;
};

struct RunConfig {
  ModelConfig model;
  ExperimentConfig experiment;
  OutputConfig output;
  std::string text;  // raw document, hashed for the summary
};

/// Parses and validates a config document:
///
///   [model]
///   g = [(1, 0, -0.5)]
///   f = [(0, 1, 0), (1, 0.5, 0)]
///   eps = 0.05
///   omega = 0.6180339887498949
///   [experiment]
///   seed = 7
///   N = 64
///
/// Comments start with '#'. Throws Error(ConfigError) naming the line and key
/// for syntax errors, unknown keys, missing required keys and range errors.
RunConfig parse_config(const std::string& text);

/// Reads and parses a file; unreadable files are ConfigErrors.
RunConfig load_config(const std::string& path);

/// The operator described by the model section (throws ConfigError on
/// invariant violations such as kernel decay or a rational omega).
OperatorSpec make_spec(const RunConfig& cfg);

}  // namespace qplab::cli
