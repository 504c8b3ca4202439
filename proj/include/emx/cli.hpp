#pragma once

#include <iosfwd>
#include <string>
#include <vector>

// Command-line front end: `emx <subcommand> [flags]`.
//
// Parameters come from flags or from a --config JSON file holding one flat
// object of dotted keys; flag --a-b-c mirrors key "a.b_c" and wins over the
// file. Failures print one line
//   error code=<code> message=<JSON string>
// to `err` and return a nonzero exit code.

namespace emx::cli {

enum ExitCode : int {
  ok = 0,
  internal = 1,
  usage = 2,
  invalid_argument = 3,
  parse = 4,
  schema_mismatch = 5,
  version_mismatch = 6,
  io = 7,
  infeasible = 8,
  not_found = 9,
};

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Config keys in documentation order; the flag of each is derived from it.
const std::vector<std::string>& config_keys();
std::string flag_of(const std::string& key);

}  // namespace emx::cli
