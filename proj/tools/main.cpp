#include "sparselab/cli.hpp"

int main(int argc, char** argv) { return sparselab::run_cli(argc, argv); }
