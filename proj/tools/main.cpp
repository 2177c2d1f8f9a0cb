#include <iostream>

#include "orbitnet/cli.hpp"

int main(int argc, char** argv) { return orbitnet::cli::main(argc, argv, std::cout, std::cerr); }
