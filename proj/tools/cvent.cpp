#include <iostream>

#include "cvent/cli.hpp"

int main(int argc, char** argv) { return cvent::cli::run_cli(argc, argv, std::cout, std::cerr); }
