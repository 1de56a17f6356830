#pragma once

#include <iosfwd>

namespace hppm {

/// Entry point of the `hppm` tool. Returns the process exit status:
/// 0 success, 2 configuration error, 3 data error, 4 numeric failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hppm
