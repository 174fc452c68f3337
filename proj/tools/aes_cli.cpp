#include <iostream>

#include "aes/cli.hpp"

int main(int argc, char** argv) { return aes::cli::run_cli(argc, argv, std::cout, std::cerr); }
