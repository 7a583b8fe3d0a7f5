#pragma once

#include <ostream>

namespace softq::cli {

// Entry point shared by the executable and the tests. Returns the process
// exit code: 0 success, 1 invariant or certificate violation, 2 usage or
// configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace softq::cli
