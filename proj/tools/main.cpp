#include "ffcs/cli.hpp"

int main(int argc, char** argv) { return ffcs::cli_main(argc, argv); }
