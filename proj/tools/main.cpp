#include <iostream>

#include "vulnopt/cli.hpp"

int main(int argc, char** argv) { return vulnopt::run_cli(argc, argv, std::cout, std::cerr); }
