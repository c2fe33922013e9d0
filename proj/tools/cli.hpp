#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stdfm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kFitFailure = 3,
  kInferenceFailure = 4,
};

/// Runs one invocation; argv[0] is the program name. Results go to `out` unless an --out
/// file is given; diagnostics and machine-readable error reasons go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "60,90,120" or "start:stop:step" (inclusive).
std::vector<int> parse_k_grid(const std::string& text);
std::vector<double> parse_list(const std::string& text);

}  // namespace stdfm::cli
