#include <iostream>

#include "dlab/cli.hpp"

int main(int argc, char** argv) { return dlab::cli::main_entry(argc, argv, std::cout, std::cerr); }
