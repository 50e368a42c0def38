#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ppc/config.hpp"

namespace ppc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kEndpointFailure = 3 };

struct Io {
  std::ostream& out;
  std::ostream& err;
  EnvLookup env;
};

// args[0] is the program name.
int run(const std::vector<std::string>& args, Io io);
int run(int argc, char** argv);

}  // namespace ppc::cli
