#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rulechain::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kConfig = 3,
    kBackend = 4,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Never lets an exception escape.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rulechain::cli
