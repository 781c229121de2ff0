#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ltlab::app {

enum ExitCode { kOk = 0, kConfig = 2, kIo = 3, kNumeric = 4 };

// Parses argv (argv[0] is the program name), dispatches one subcommand and
// writes <out-dir>/<name>.report.json plus an optional CSV.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ltlab::app
