#include "phasecell/cli.hpp"

int main(int argc, char** argv) { return phasecell::cli_main(argc, argv); }
