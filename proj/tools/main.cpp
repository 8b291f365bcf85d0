#include <iostream>

#include "lusfeat_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lusfeat::cli::run(args, std::cout, std::cerr);
}
