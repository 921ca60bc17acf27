#include <iostream>

#include "locsketch/cli.hpp"

int main(int argc, char** argv) { return locsketch::run_cli(argc, argv, std::cout, std::cerr); }
