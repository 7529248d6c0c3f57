#include <string>
#include <vector>

#include "freqkan/cli.hpp"

int main(int argc, char** argv) {
  return freqkan::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
