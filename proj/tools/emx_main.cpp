#include <iostream>

#include "emx/cli.hpp"

int main(int argc, char** argv) { return emx::cli::run(argc, argv, std::cout, std::cerr); }
