// qplab: command-line driver for the experiments in qplab_core.
//
//   qplab <subcommand> --config <path> [--out <dir>] [--workers <k>]
//
// Exit status: 0 when every check passed, 1 when a violation was recorded,
// 2 for configuration or usage errors.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "qplab/error.hpp"
#include "qplab/parallel.hpp"
#include "qplab_cli/commands.hpp"

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw qplab::Error(qplab::ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qplab;
  CLI::App app{"qplab: numerical checks for long-range quasi-periodic operators"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  int workers = -1;
  for (const auto& name : cli::subcommands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config,-c", config_path, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--workers,-w", workers, "worker threads (0 = all cores)")->check(CLI::Range(0, 1024));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    const auto start = std::chrono::steady_clock::now();
    const cli::RunConfig cfg = cli::load_config(config_path);
    parallel::set_workers(workers >= 0 ? static_cast<unsigned>(workers) : cfg.experiment.workers);
    const std::filesystem::path dir = out_dir.empty() ? cfg.output.dir : out_dir;
    std::filesystem::create_directories(dir);

    const cli::CommandResult result = cli::run_command(name, cfg);
    result.csv.write((dir / (name + ".csv")).string());
    write_text(dir / "summary.json", cli::make_summary(name, cfg, result).dump(2) + "\n");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cfg.output.timing) {
      const cli::Json timing{{"subcommand", name}, {"wall_seconds", wall}, {"workers", parallel::workers()}};
      write_text(dir / "timing.json", timing.dump(2) + "\n");
    }

    for (const auto& v : result.violations) std::cerr << "violation: " << v << "\n";
    std::cout << name << ": " << result.csv.rows() << " rows, " << result.violations.size() << " violations, "
              << wall << " s -> " << dir.string() << "\n";
    return result.violations.empty() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "qplab " << name << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "qplab " << name << ": " << e.what() << "\n";
    return 1;
  }
}
