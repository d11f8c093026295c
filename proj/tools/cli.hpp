#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mrq::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDomainError = 2,
  kVerifyFailed = 3,
  kConfigError = 4,
};

/// Runs one command line (argv[0] is the program name) and returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// %.17g
std::string format_number(double v);

/// One row of a verification report.
struct CheckResult {
  std::string suite;
  std::string check;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

/// Suites: mrq, scale, converse, renewal, thm2. Deterministic in `seed`.
std::vector<CheckResult> run_verify_suite(const std::string& suite, std::uint64_t seed);

}  // namespace mrq::cli
