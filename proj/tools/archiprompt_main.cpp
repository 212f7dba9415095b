#include <iostream>

#include "archiprompt/service.hpp"

int main(int argc, char** argv) {
  return archiprompt::service::run_cli(argc, argv, std::cin, std::cout, std::cerr);
}
