#pragma once

// Command-line front end: prepare, explain, evaluate, benchmark,
// export-model and conformance subcommands.

#include <iosfwd>
#include <string>
#include <vector>

#include "ruleseeker/core.hpp"

namespace ruleseeker {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 1;
inline constexpr int kData = 2;
inline constexpr int kOracle = 3;
inline constexpr int kSolver = 4;
inline constexpr int kAllRowsFailed = 5;
}  // namespace exit_code

// "IF petal_width < 0.8 AND NOT sepal_length >= 6.1 THEN class=setosa". Falls
// back to feature_<j>=<v> literals when no names are given.
std::string renderRule(const Explanation& e, const std::vector<std::string>& featureNames = {},
                       const std::string& className = "");

// Human-readable text goes to `out` / `err`; returns the process exit code.
int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ruleseeker
