#pragma once

namespace causalbandit {

// Entry point of the command line tool. Returns 0 on success, 1 on a usage
// error and 2 on a runtime error.
int cli_main(int argc, char** argv);

}  // namespace causalbandit
