#include "sparseprox/cli.hpp"

int main(int argc, char** argv) { return sparseprox::run_cli(argc, argv); }
