#include <string>
#include <vector>

#include "airgraph/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return airgraph::run_cli(args);
}
