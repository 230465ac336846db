#include <iostream>

#include "eqlink/cli/commands.hpp"

int main(int argc, char** argv) {
  const auto result = eqlink::cli::run_cli(argc, argv);
  std::cout << result.out;
  std::cerr << result.err;
  return result.exit_code;
}
