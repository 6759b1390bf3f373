#pragma once

#include <ostream>

namespace qclab::cli {

// Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 usage or input error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qclab::cli
