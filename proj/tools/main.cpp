#include <iostream>

#include "cartan/cli.hpp"

int main(int argc, char** argv) { return cartan::run_cli(argc, argv, std::cout, std::cerr); }
