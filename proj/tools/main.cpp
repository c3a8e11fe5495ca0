#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return lmsrstop::cli::run(argc, argv, std::cout, std::cerr); }
