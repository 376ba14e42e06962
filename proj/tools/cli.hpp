#pragma once

#include <iosfwd>

namespace lingbayes::cli {

// Runs one subcommand. Reports go to `out`; failures print a single line
// "error: <Code>: <message>" to `err` and return a nonzero exit code.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lingbayes::cli
