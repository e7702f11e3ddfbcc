#include <iostream>

#include "monoport/cli.hpp"

int main(int argc, char** argv) {
  return monoport::run_cli(argc, argv, std::cout, std::cerr);
}
