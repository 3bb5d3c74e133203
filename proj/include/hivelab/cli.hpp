#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hivelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitUsage = 64;

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  int threads = 1;
  long budget = -1;     // < 0: command default
  std::string out;      // empty: stdout
  double tol = -1.0;    // < 0: command default
};

// args excludes the program name. JSON (or CSV) goes to `out` unless --out is
// given; diagnostics and usage text go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hivelab::cli
