#include <iostream>

#include "fastlik/cli.hpp"

int main(int argc, char** argv) { return fastlik::cli::run(argc, argv, std::cout, std::cerr); }
