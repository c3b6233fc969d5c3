#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "hdlss/cli/config.hpp"

namespace hdlss::cli {

/// Exit-code contract of the command-line tool.
enum ExitCode : int {
  kExitPass = 0,
  kExitVerificationFailed = 1,
  kExitConfig = 2,
  kExitUnsupported = 3,
  kExitExcessiveFailures = 4,
  kExitIo = 5,
};

int exit_code_for(ErrorKind kind) noexcept;

/// Command-line flags that override the config file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<OutputFormat> format;
};

void apply(const Overrides& o, RunConfig& c);

// Each command writes its artifacts into c.out_dir, the text summary to
// `out` (text format only) and progress or warnings to `err`. They throw
// hdlss::Error; run_command maps errors to exit codes.
int cmd_spectrum(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_classify(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err);

/// Loads the config, applies overrides, runs the named command and returns
/// the exit code. Diagnostics go to `err`.
int run_command(std::string_view command, const std::filesystem::path& config,
                const Overrides& overrides, std::ostream& out, std::ostream& err);

}  // namespace hdlss::cli
