#include <iostream>
#include <string>
#include <vector>

#include "rankreg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return rankreg::run_cli(args, std::cout, std::cerr);
}
