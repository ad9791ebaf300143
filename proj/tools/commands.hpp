#pragma once

#include <string>

namespace stsexo::tools {

struct CliOptions {
  std::string config_path;  // empty: built-in defaults
  std::string out_dir;      // empty: [output] directory
  std::string controller = "hybrid";
  std::string grid;  // empty: [metrics] alpha_grid
  int count = 5;
};

int CmdSimulate(const CliOptions& opts);
int CmdCompare(const CliOptions& opts);
int CmdTuneAlpha(const CliOptions& opts);
int CmdFrames(const CliOptions& opts);
int CmdModelInfo(const CliOptions& opts);

/// Parses arguments, sets up logging from STSEXO_LOG_LEVEL and dispatches.
/// Errors are reported on stderr; the return value is the exit code.
int RunCli(int argc, const char* const* argv);

}  // namespace stsexo::tools
