#include "hkperiod/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hkp::cli::run(argc, argv, std::cout, std::cerr); }
