#include <iostream>

#include "dpack/cli.hpp"

int main(int argc, char** argv) { return dpack::cli::run(argc, argv, std::cout, std::cerr); }
