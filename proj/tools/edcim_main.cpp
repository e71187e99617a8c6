#include "edcim/cli.hpp"

int main(int argc, char** argv) { return edcim::run_cli(argc, argv); }
