#include <iostream>
#include <string>
#include <vector>

#include "kernlyap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kernlyap::cli::run(args, std::cout, std::cerr);
}
