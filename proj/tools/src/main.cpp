#include <iostream>

#include "softq_cli/cli.hpp"

int main(int argc, char** argv) { return softq::cli::run(argc, argv, std::cout, std::cerr); }
