#include <iostream>
#include <string>
#include <vector>

#include "autocut/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return autocut::run_cli(args, std::cout, std::cerr);
}
