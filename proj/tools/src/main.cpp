#include <iostream>

#include "ttita_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ttita::cli::run(args, std::cout, std::cerr);
}
