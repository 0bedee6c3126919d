#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace contraforge::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kBackendFailure = 3, kValidationFailure = 4 };

inline constexpr const char* kToolName = "contraforge";
inline constexpr const char* kToolVersion = "0.1.0";

using Getenv = std::function<const char*(const char*)>;

// Runs one command line (without the program name). Never throws; failures
// are reported on `err` and mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Getenv& getenv);

int run(int argc, char** argv);

}  // namespace contraforge::cli
