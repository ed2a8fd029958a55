#include <iostream>

#include "wbpost/cli.hpp"

int main(int argc, char** argv) {
  return wbpost::cli::run(argc, argv, std::cout, std::cerr);
}
