#pragma once

#include <iosfwd>

namespace pioneer {

// Entry point of the pioneer command line tool. Exit status 0 on success,
// 2 on usage errors, ErrorCode values for library errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pioneer
