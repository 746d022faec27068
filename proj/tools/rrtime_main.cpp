#include <exception>
#include <iostream>

#include "rrtime/cli.hpp"

int main(int argc, char** argv) {
  try {
    return rrtime::cli::run(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return rrtime::cli::kInternalError;
  }
}
