#include <iostream>
#include <string>
#include <vector>

#include "defiperf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return defiperf::run_cli(args, std::cout, std::cerr);
}
