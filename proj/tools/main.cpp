#include <iostream>
#include <string>
#include <vector>

#include "geograsp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return geograsp::run_cli(args, std::cout, std::cerr);
}
