#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polyfilt::cli {

// Exit codes: 0 success, 1 malformed input or configuration, 2 numerical
// failure (including a failed verification suite).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SuiteResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
};

// Oracle-equivalence suites: "kalman-oracle", "pipeline", "riccati",
// "all".
std::vector<SuiteResult> run_suite(const std::string& suite);

}  // namespace polyfilt::cli
