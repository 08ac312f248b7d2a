#include <iostream>
#include <string>
#include <vector>

#include "betajac/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return betajac::cli::dispatch(args, std::cout, std::cerr);
}
