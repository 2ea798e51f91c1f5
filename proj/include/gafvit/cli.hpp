#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gafvit::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kNumericError = 3,
};

// args excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

} // namespace gafvit::cli
