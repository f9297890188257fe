#include <iostream>
#include <string>
#include <vector>

#include "pdc/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return pdc::cli::run(args, std::cout, std::cerr);
}
