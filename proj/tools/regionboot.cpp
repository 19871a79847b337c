#include <iostream>
#include <string>
#include <vector>

#include "regionboot/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return regionboot::run_cli(args, std::cout, std::cerr);
}
