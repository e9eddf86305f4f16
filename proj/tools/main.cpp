#include <string>
#include <vector>

#include "sparta/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sparta::cli::run(std::move(args));
}
