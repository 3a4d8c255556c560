#include <iostream>

#include "setsim/cli.hpp"

int main(int argc, char** argv) { return setsim::run_cli(argc, argv, std::cout, std::cerr); }
