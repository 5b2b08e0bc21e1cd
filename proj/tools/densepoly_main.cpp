#include <iostream>
#include <string>
#include <vector>

#include "densepoly/cli.hpp"

int main(int argc, char** argv) {
  return densepoly::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
