#include <iostream>
#include <string>
#include <vector>

#include "koq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return koq::cli::run(args, std::cout, std::cerr);
}
