#include "cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return drsoc::cli::run_cli(argc, argv, std::cout, std::cerr); }
