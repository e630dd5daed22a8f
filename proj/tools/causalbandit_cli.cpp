#include "causalbandit/cli.hpp"

int main(int argc, char** argv) { return causalbandit::cli_main(argc, argv); }
