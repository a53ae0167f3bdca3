#include <iostream>

#include "gfa/cli.hpp"

int main(int argc, char** argv) { return gfa::cli::run(argc, argv, std::cout, std::cerr); }
