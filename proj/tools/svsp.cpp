#include <iostream>

#include "svsp/cli/cli.hpp"

int main(int argc, char** argv) { return svsp::cli::run(argc, argv, std::cout, std::cerr); }
