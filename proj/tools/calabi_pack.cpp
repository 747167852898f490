#include "calabi/cli.h"

#include <iostream>

int main(int argc, char** argv) { return calabi::cli::run(argc, argv, std::cout, std::cerr); }
