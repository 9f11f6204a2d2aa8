#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "qplab_cli/config.hpp"
#include "qplab_cli/output.hpp"

namespace qplab::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

struct CommandResult {
  CsvTable csv;
  Json results = Json::object();
  std::vector<std::string> violations;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand. Module errors raised while running are caught and
/// reported as violations with the subcommand and grid context attached.
/// Throws ConfigError for an unknown subcommand.
CommandResult run_command(const std::string& name, const RunConfig& cfg);

/// summary.json content: tool/version, config hash and echo, results and
/// violations. Contains nothing that depends on timing or worker count.
Json make_summary(const std::string& name, const RunConfig& cfg, const CommandResult& r);

}  // namespace qplab::cli
