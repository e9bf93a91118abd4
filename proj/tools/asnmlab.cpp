#include <iostream>

#include "asnm/cli.hpp"

int main(int argc, char** argv) { return asnm::cli::run(argc, argv, std::cout, std::cerr); }
