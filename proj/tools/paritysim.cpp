#include <iostream>

#include "paritysim/cli.hpp"

int main(int argc, char** argv) { return paritysim::cli::run(argc, argv, std::cout, std::cerr); }
