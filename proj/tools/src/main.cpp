#include <iostream>

#include "tpmr_cli/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return tpmr::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
