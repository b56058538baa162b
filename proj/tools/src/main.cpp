#include <iostream>
#include <string>
#include <vector>

#include "homsum/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return homsum::cli::run(args, std::cout, std::cerr);
}
