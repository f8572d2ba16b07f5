#include <iostream>
#include <string>
#include <vector>

#include "mafrg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mafrg::cli::run(args, std::cout, std::cerr);
}
