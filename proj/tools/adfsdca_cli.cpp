#include <iostream>
#include <string>
#include <vector>

#include "adfsdca/experiment.hpp"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return adfsdca::cli_main(args, std::cout, std::cerr);
}
