#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spdc {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitValidation = 2,
    kExitNoSolution = 3,
    kExitIo = 4,
};

// Runs the command-line front end; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spdc
