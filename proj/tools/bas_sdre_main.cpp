#include <iostream>
#include <string>
#include <vector>

#include "bas_sdre/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bas_sdre::cli::run(args, std::cout, std::cerr);
}
