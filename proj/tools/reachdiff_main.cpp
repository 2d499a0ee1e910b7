#include <iostream>
#include <string>
#include <vector>

#include "reachdiff/cli.hpp"

int main(int argc, char** argv) {
  return reachdiff::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
