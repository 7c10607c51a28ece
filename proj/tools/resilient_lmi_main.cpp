#include <iostream>

#include "resilient/cli.hpp"

int main(int argc, char** argv) {
  return resilient::cli::run(argc, argv, std::cout, std::cerr);
}
