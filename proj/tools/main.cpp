#include <vector>
#include <string>

#include "qspectra/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qspectra::run_cli(std::move(args));
}
