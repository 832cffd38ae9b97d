#include <string>
#include <vector>

#include "spikeseq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spikeseq::cli::run_command(args);
}
