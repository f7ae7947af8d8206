#include <iostream>

#include "hens/cli/commands.hpp"

int main(int argc, char** argv) { return hens::cli::run(argc, argv, std::cout, std::cerr); }
