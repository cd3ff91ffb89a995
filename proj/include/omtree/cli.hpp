#pragma once

#include <iosfwd>

namespace omtree {

/// Exit codes: 0 success, 1 usage error, 2 runtime error.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace omtree
