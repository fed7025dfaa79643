#include <iostream>

#include "bbo/cli.hpp"

int main(int argc, char** argv) { return bbo::cli::main(argc, argv, std::cout, std::cerr); }
