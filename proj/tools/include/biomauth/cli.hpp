#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "biomauth/data.hpp"
#include "biomauth/errors.hpp"
#include "biomauth/experiment.hpp"

namespace biomauth::cli {

/// Bad flags or flag combinations. Maps to exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct FuseCommand {
  std::filesystem::path touch;
  std::filesystem::path sensors;
  std::size_t samples_per_user = 100;
  std::filesystem::path out = "fused.csv";
};

struct SynthCommand {
  SyntheticSpec spec;
  std::filesystem::path out = "synthetic";  // directory for touch.csv and sensors.csv
};

struct RunCommand {
  ExperimentConfig config;
  std::filesystem::path out = "results";
  bool dump_splits = false;
  bool save_models = false;
  bool plots = true;
  bool include_timing = true;
};

struct ReportCommand {
  std::filesystem::path in;
  std::filesystem::path out;  // defaults to <in>/plots
};

struct SelftestCommand {};

/// `--help` anywhere: print `text` and exit 0.
struct HelpCommand {
  std::string text;
};

using CliCommand = std::variant<FuseCommand, SynthCommand, RunCommand, ReportCommand, SelftestCommand, HelpCommand>;

/// `args` excludes the program name. Throws UsageError for unknown
/// commands or flags, missing values, and invalid combinations.
CliCommand parse_args(std::span<const std::string> args);
CliCommand parse_args(int argc, const char* const* argv);

/// Exit codes.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// Executes a parsed command, writing progress to `log`. Errors propagate.
int execute(const CliCommand& command, std::ostream& log);

/// parse_args + execute with exceptions mapped to exit codes and messages
/// written to `err`.
int run_main(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace biomauth::cli
