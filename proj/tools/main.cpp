#include "omtree/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return omtree::cli_main(argc, argv, std::cout, std::cerr); }
