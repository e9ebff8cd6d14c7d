#include <iostream>

#include "m2spec/cli.hpp"

int main(int argc, char** argv) { return m2spec::run_cli(argc, argv, std::cout, std::cerr); }
