#include <iostream>
#include <string>
#include <vector>

#include "cryombir/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return cryombir::cli_main(args, std::cout, std::cerr);
}
