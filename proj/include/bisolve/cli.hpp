#pragma once

namespace bisolve {

// Entry point behind tools/main.cpp.  Exit codes: 0 pass/certified, 1
// malformed config or usage, 2 clean admissibility rejection, 3
// nonconvergence or runtime failure.
int run_cli(int argc, char** argv);

}  // namespace bisolve
