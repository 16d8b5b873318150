#include "distlab/cli.hpp"

int main(int argc, char** argv) { return distlab::cli_main(argc, argv); }
