#include <iostream>

#include "mqfb/cli.hpp"

int main(int argc, char** argv) { return mqfb::cli::run(argc, argv, std::cout, std::cerr); }
