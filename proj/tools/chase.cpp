#include <iostream>
#include <string>
#include <vector>

#include "chase/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return chase::cli::cliMain(args, std::cout, std::cerr);
}
