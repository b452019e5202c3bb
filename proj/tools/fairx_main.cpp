#include "fairx/cli.hpp"

int main(int argc, char** argv) { return fairx::cli_main(argc, argv); }
