#include "flagcount/harness.hpp"

#include <iostream>

int main(int argc, char** argv) { return flagcount::run_cli(argc, argv, std::cout, std::cerr); }
