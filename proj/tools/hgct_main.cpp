#include <iostream>

#include "hgct/commands.hpp"

int main(int argc, char** argv) { return hgct::run_cli(argc, argv, std::cout, std::cerr); }
