#include <iostream>

#include "aels/cli.hpp"

int main(int argc, char** argv) {
    return aels::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
