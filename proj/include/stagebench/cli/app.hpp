#pragma once

namespace stagebench::cli {

// Parses argv and dispatches to a subcommand. Returns the process exit code:
// 0 success, 1 runtime failure, 2 usage error.
int run(int argc, char **argv);

} // namespace stagebench::cli
