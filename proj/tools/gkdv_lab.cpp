#include <iostream>
#include <vector>

#include "gkdvlab/config.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gkdvlab::cli_main(args, nullptr, &std::cout);
}
