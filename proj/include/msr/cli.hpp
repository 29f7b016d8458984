#pragma once

#include <iosfwd>

namespace msr::cli {

/// Entry point of the `msr` executable. Returns 0 on success, 1 on a library
/// error and 2 on a usage error; diagnostics go to `err` as one line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace msr::cli
