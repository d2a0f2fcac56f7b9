#include <iostream>
#include <string>
#include <vector>

#include "rcar/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rcar::run_cli(args, std::cout, std::cerr);
}
