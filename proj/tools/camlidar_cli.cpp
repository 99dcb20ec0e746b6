#include <string>
#include <vector>

#include "camlidar/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return camlidar::cli_dispatch(args);
}
