#include <iostream>

#include "pbe/cli.hpp"

int main(int argc, char** argv) { return pbe::cli::run(argc, argv, std::cout, std::cerr); }
