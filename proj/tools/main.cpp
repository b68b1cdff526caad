#include "bisolve/cli.hpp"

int main(int argc, char** argv) { return bisolve::run_cli(argc, argv); }
