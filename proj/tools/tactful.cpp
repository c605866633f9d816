#include <iostream>
#include <string>
#include <vector>

#include "tactful/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return tactful::cli::run(args, std::cout, std::cerr);
}
