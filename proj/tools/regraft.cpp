#include <iostream>

#include "regraft/cli/run.hpp"

int main(int argc, char** argv) { return regraft::cli::run(argc, argv, std::cout, std::cerr); }
