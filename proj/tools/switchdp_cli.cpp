#include "switchdp/cli.hpp"

int main(int argc, char** argv) { return switchdp::cli::run(argc, argv); }
