#include "dga/cli.hpp"

int main(int argc, char** argv) {
  return dga::cli_main(argc, argv);
}
