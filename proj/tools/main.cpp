#include <iostream>
#include <string>
#include <vector>

#include "oia/cli/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return oia::cli::run(args, std::cout, std::cerr);
}
