#include <iostream>

#include "asnn/cli.hpp"

int main(int argc, char** argv) { return asnn::cli::run(argc, argv, std::cout, std::cerr); }
