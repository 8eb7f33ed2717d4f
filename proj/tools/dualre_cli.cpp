// SPDX-License-Identifier: Apache-2.0
#include "dualre/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dualre::run_cli(args, std::cout, std::cerr);
}
