#include <iostream>

#include "reachplan/cli.hpp"

int main(int argc, char** argv) { return reachplan::cli::dispatch(argc, argv, std::cout, std::cerr); }
