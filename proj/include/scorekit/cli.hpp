#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace scorekit::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationFailure = 1;
inline constexpr int kNumericalFailure = 2;

/// Parses `args` (without the program name), runs one command and writes its
/// report to `out` (or to --output). Errors go to `err` as a one-line JSON
/// object {"error": <code>, "message": ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct CommandInfo {
  std::string name;
  std::string summary;
  /// Library operations the command drives, as "module::operation".
  std::vector<std::string> operations;
  /// A complete argument list that exercises the command.
  std::vector<std::string> example;
};

const std::vector<CommandInfo>& command_table();

/// Every public module operation that must be reachable from the CLI.
const std::vector<std::string>& module_operations();

/// Writes config files, model and density specs, samples and a manifest of
/// expected values into `dir`.
void emit_reproduction_suite(const std::filesystem::path& dir);

/// Runs every case listed in `dir`/manifest.json, writes each report to
/// `dir`/outputs/<id>.json and the summary to `out`. Returns kOk when every
/// check passes, kValidationFailure otherwise.
int run_suite(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

}  // namespace scorekit::cli
