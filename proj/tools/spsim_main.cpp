#include "spsim/cli.hpp"

int main(int argc, char** argv) { return spsim::cli::cli_main(argc, argv); }
