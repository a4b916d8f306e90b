#pragma once

// Command-line driver: compile, run and relationships subcommands.

#include <iosfwd>
#include <string>
#include <vector>

namespace lom {

/// Exit codes are part of the tool's contract.
enum ExitCode : int {
  kExitOk = 0,
  kExitCompileError = 1,
  kExitDeadlock = 2,
  kExitRuntimeError = 3,
  kExitStepLimit = 4,
};

/// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace lom
