#include <string>
#include <vector>

#include "fqnprobe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fqnprobe::run_cli(std::move(args));
}
