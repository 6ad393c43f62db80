#include <iostream>

#include "optrates/cli.hpp"

int main(int argc, char** argv) { return optrates::cli::run(argc, argv, std::cout, std::cerr); }
