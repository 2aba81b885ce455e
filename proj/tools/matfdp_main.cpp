#include <iostream>

#include "matfdp/cli.hpp"

int main(int argc, char** argv) { return matfdp::run_cli(argc, argv, std::cout, std::cerr); }
