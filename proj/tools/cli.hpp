#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace l3inv::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kInvalidFlags = 2,
    kGenerationFailure = 3,
    kIoError = 4,
    kShapeMismatch = 5,  // also DataModelMismatch and UnknownSplit
    kNumericalFailure = 6,
};

/// Runs one subcommand (generate, train, eval, predict). `args` excludes the
/// program name. Summary lines go to `out` as key=value.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace l3inv::cli
