#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace edgepupil::cli {

// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,     // bad flags or arguments
    kData = 2,      // unreadable or malformed inputs, invalid params
    kInternal = 3,  // anything else
};

// Entry point behind the `edgepupil` binary. args[0] is the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace edgepupil::cli
