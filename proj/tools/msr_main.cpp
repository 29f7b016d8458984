#include <iostream>

#include "msr/cli.hpp"

int main(int argc, char** argv) { return msr::cli::run(argc, argv, std::cout, std::cerr); }
