#include <iostream>

#include "eistwist_cli/cli.hpp"

int main(int argc, char** argv) { return eistwist::cli::main(argc, argv, std::cout, std::cerr); }
