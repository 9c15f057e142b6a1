#include <iostream>

#include "sunfleet_cli/cli.hpp"

int main(int argc, char** argv) {
  return sunfleet::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
