#pragma once

#include <atomic>
#include <ostream>
#include <string>
#include <vector>

namespace hrt::cli {

/// Exit codes of the hrt tool.
enum ExitCode : int {
    kAccept = 0,        ///< test: null not rejected; other commands: success
    kReject = 1,        ///< test: null rejected
    kUsage = 2,         ///< I/O, parse or parameter error
    kDegenerate = 3,    ///< degenerate or numerically unusable data
    kInterrupted = 130  ///< mc stopped by SIGINT, partial results written
};

/// Set from the SIGINT handler; mc stops between cells when it is raised.
std::atomic<bool>& interrupt_flag();

/// Parse "a:b:step" (inclusive range) or a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hrt::cli
