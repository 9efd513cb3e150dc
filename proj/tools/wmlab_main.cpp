#include "wmlab/cli.hpp"

int main(int argc, char** argv) { return wmlab::cli::run_cli(argc, argv); }
