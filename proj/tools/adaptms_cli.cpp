#include "adaptms/cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  adaptms::cli::tune_allocator();
  return adaptms::cli::run(argc, argv, std::cout, std::cerr);
}
