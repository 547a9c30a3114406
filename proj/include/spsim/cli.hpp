#pragma once

#include "spsim/errors.hpp"

namespace spsim::cli {

// Stable exit-code contract:
//   0 success, 1 input/syntax error, 2 membrane geometry error, 3 I/O error,
//   4 engine failure, 5 differential check violation, 6 state space too
//   large for the reference enumerator, 7 grid shape mismatch.
int exit_code_for(ErrorKind kind);

// Full command-line front end (validate / run / oracle-check / bone).
// argv[0] is the program name, as in main().
int cli_main(int argc, const char* const* argv);

}  // namespace spsim::cli
