#pragma once

#include <iosfwd>

namespace podlrom::cli {

// Exit codes: 0 success, 1 compute failure, 2 bad arguments, config or input files.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace podlrom::cli
