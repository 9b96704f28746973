#include <iostream>

#include "mixcenter/cli.hpp"

int main(int argc, char** argv) { return mixcenter::cli::run(argc, argv, std::cout, std::cerr); }
