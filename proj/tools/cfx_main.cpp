#include "cfx/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cfx::cli::run(argc, argv, std::cout, std::cerr); }
