#include <iostream>
#include <string>
#include <vector>

#include "vsp/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return vsp::cli::run(args, std::cout, std::cerr);
}
